#include <latentdag/error.hpp>
#include <latentdag/sem.hpp>

#include <algorithm>
#include <cmath>

namespace latentdag {

LinearSem::LinearSem(Dag dag, std::vector<NodeModel> params) : m_dag(std::move(dag)), m_params(std::move(params)) {
    if (m_params.size() != m_dag.size()) throw Error(ErrorKind::shape_mismatch, "one NodeModel per node required");
    for (std::size_t i = 0; i < m_params.size(); ++i) {
        const auto& p = m_params[i];
        if (p.coeffs.size() != m_dag.parents(i).size())
            throw Error(ErrorKind::shape_mismatch, "coefficients of '" + m_dag.name(i) + "' do not match its parents");
        if (!(p.noise_sd > 0.0) || !std::isfinite(p.noise_sd))
            throw Error(ErrorKind::invalid_config, "noise sd of '" + m_dag.name(i) + "' must be positive");
    }
}

double LinearSem::coefficient(std::size_t parent, std::size_t child) const {
    const auto& parents = m_dag.parents(child);
    auto it = std::lower_bound(parents.begin(), parents.end(), parent);
    if (it == parents.end() || *it != parent) return 0.0;
    return m_params[child].coeffs[static_cast<std::size_t>(it - parents.begin())];
}

double LinearSem::coefficient(std::string_view parent, std::string_view child) const {
    return coefficient(m_dag.index(parent), m_dag.index(child));
}

Eigen::MatrixXd LinearSem::coefficient_matrix() const {
    const auto n = static_cast<Eigen::Index>(m_dag.size());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t child = 0; child < m_dag.size(); ++child) {
        const auto& parents = m_dag.parents(child);
        for (std::size_t k = 0; k < parents.size(); ++k)
            b(static_cast<Eigen::Index>(child), static_cast<Eigen::Index>(parents[k])) = m_params[child].coeffs[k];
    }
    return b;
}

Eigen::MatrixXd LinearSem::implied_covariance() const {
    const auto n = static_cast<Eigen::Index>(m_dag.size());
    const Eigen::MatrixXd b = coefficient_matrix();
    Eigen::VectorXd var(n);
    for (Eigen::Index i = 0; i < n; ++i) var(i) = std::pow(m_params[static_cast<std::size_t>(i)].noise_sd, 2);
    const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(n, n) - b).inverse();
    return inv * var.asDiagonal() * inv.transpose();
}

}  // namespace latentdag
