#ifndef LATENTDAG_SEM_HPP
#define LATENTDAG_SEM_HPP

#include <latentdag/dag.hpp>

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace latentdag {

/// Local linear-Gaussian model of one node. `coeffs[k]` belongs to `dag.parents(node)[k]`.
struct NodeModel {
    double intercept = 0.0;
    std::vector<double> coeffs;
    double noise_sd = 1.0;
};

/// Linear structural equation model: a Dag plus one NodeModel per node.
class LinearSem {
public:
    LinearSem() = default;
    LinearSem(Dag dag, std::vector<NodeModel> params);

    const Dag& dag() const { return m_dag; }
    const NodeModel& params(std::size_t node) const { return m_params.at(node); }
    const std::vector<NodeModel>& params() const { return m_params; }

    /// Coefficient of parent -> child, or 0 when the edge is absent.
    double coefficient(std::size_t parent, std::size_t child) const;
    double coefficient(std::string_view parent, std::string_view child) const;

    /// Weighted adjacency B with B(child, parent) = coefficient.
    Eigen::MatrixXd coefficient_matrix() const;

    /// Closed-form covariance (I - B)^-1 diag(sd^2) (I - B)^-T.
    Eigen::MatrixXd implied_covariance() const;

private:
    Dag m_dag;
    std::vector<NodeModel> m_params;
};

}  // namespace latentdag

#endif  // LATENTDAG_SEM_HPP
