#include <latentdag/error.hpp>
#include <latentdag/residuals.hpp>

#include <algorithm>
#include <cmath>

namespace latentdag {

namespace {

constexpr double kCdfTol = 1e-12;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

GaussianCdf::GaussianCdf(Eigen::VectorXd means, double sd) : m_means(std::move(means)), m_sd(sd) {
    if (!(sd > 0.0) || !std::isfinite(sd)) throw Error(ErrorKind::invalid_cdf, "Gaussian CDF needs a positive sd");
}

std::pair<double, double> GaussianCdf::bounds(Eigen::Index sample, double y) const {
    const double f = normal_cdf((y - m_means(sample)) / m_sd);
    return {f, f};
}

DiscreteCdf::DiscreteCdf(Eigen::MatrixXd probabilities) : m_cumulative(std::move(probabilities)) {
    if (m_cumulative.cols() < 1) throw Error(ErrorKind::invalid_cdf, "discrete CDF needs at least one level");
    for (Eigen::Index i = 0; i < m_cumulative.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < m_cumulative.cols(); ++k) {
            const double p = m_cumulative(i, k);
            if (!(p >= 0.0)) throw Error(ErrorKind::invalid_cdf, "negative level probability");
            acc += p;
            m_cumulative(i, k) = acc;
        }
        if (std::abs(acc - 1.0) > 1e-9) throw Error(ErrorKind::invalid_cdf, "level probabilities do not sum to 1");
        m_cumulative(i, m_cumulative.cols() - 1) = 1.0;
    }
}

DiscreteCdf DiscreteCdf::gaussian_on_codes(const Eigen::VectorXd& means, double sd, int levels) {
    if (levels < 2) throw Error(ErrorKind::invalid_cdf, "ordinal CDF needs at least 2 levels");
    if (!(sd > 0.0)) throw Error(ErrorKind::invalid_cdf, "ordinal CDF needs a positive sd");
    Eigen::MatrixXd probs(means.size(), levels);
    for (Eigen::Index i = 0; i < means.size(); ++i) {
        double prev = 0.0;
        for (int k = 0; k < levels; ++k) {
            const double upper = k + 1 == levels ? 1.0 : normal_cdf((k + 0.5 - means(i)) / sd);
            probs(i, k) = upper - prev;
            prev = upper;
        }
    }
    return DiscreteCdf(std::move(probs));
}

std::pair<double, double> DiscreteCdf::bounds(Eigen::Index sample, double y) const {
    const auto level = static_cast<Eigen::Index>(std::llround(y));
    if (level < 0 || level >= m_cumulative.cols() || static_cast<double>(level) != y)
        throw Error(ErrorKind::invalid_cdf, "observed value is not a level of the CDF");
    const double upper = m_cumulative(sample, level);
    const double lower = level == 0 ? 0.0 : m_cumulative(sample, level - 1);
    return {lower, upper};
}

Eigen::VectorXd predict_node(const LinearSem& sem, const DataMatrix& data, std::size_t node,
                             const std::vector<std::size_t>& clamp) {
    const Dag& dag = sem.dag();
    if (node >= dag.size()) throw Error(ErrorKind::unknown_node, "node index out of range");
    const NodeModel& p = sem.params(node);
    Eigen::VectorXd out = Eigen::VectorXd::Constant(data.rows(), p.intercept);
    const auto& parents = dag.parents(node);
    for (std::size_t k = 0; k < parents.size(); ++k) {
        if (std::find(clamp.begin(), clamp.end(), parents[k]) != clamp.end()) continue;
        out += p.coeffs[k] * data.column(data.index(dag.name(parents[k])));
    }
    return out;
}

Eigen::VectorXd continuous_residual(const DataMatrix& data, std::size_t node, const Eigen::VectorXd& prediction) {
    if (data.info(node).kind != VariableKind::continuous)
        throw Error(ErrorKind::kind_mismatch, "'" + data.info(node).name + "' is not continuous");
    if (prediction.size() != data.rows()) throw Error(ErrorKind::shape_mismatch, "prediction length differs from data");
    return data.column(node) - prediction;
}

Eigen::VectorXd psr(const DataMatrix& data, std::size_t node, const ConditionalCdf& cdf) {
    const auto y = data.column(node);
    Eigen::VectorXd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const auto [lower, upper] = cdf.bounds(i, y(i));
        if (!(lower >= -kCdfTol && upper <= 1.0 + kCdfTol && lower <= upper + kCdfTol))
            throw Error(ErrorKind::invalid_cdf, "CDF out of [0, 1] or not monotone at sample " + std::to_string(i));
        out(i) = std::clamp(lower + upper - 1.0, -1.0, 1.0);
    }
    return out;
}

ResidualMatrix residual_matrix(const DataMatrix& data, const LinearSem& sem, const ResidualOptions& options) {
    const Dag& dag = sem.dag();
    if (dag.nodes() != data.names()) throw Error(ErrorKind::node_set_mismatch, "model and data columns differ");

    std::vector<std::size_t> clamp;
    std::vector<std::size_t> modeled;
    for (std::size_t j = 0; j < dag.size(); ++j) {
        if (data.info(j).role == NodeRole::latent_estimate) {
            if (options.clamp_latents) clamp.push_back(j);
        } else {
            modeled.push_back(j);
        }
    }

    Eigen::MatrixXd values(data.rows(), static_cast<Eigen::Index>(modeled.size()));
    std::vector<std::string> names;
    std::vector<NodeRole> roles;
    for (std::size_t k = 0; k < modeled.size(); ++k) {
        const std::size_t j = modeled[k];
        const ColumnInfo& info = data.info(j);
        const Eigen::VectorXd prediction = predict_node(sem, data, j, clamp);
        const double sd = sem.params(j).noise_sd;
        Eigen::VectorXd r;
        if (info.kind == VariableKind::ordinal) {
            r = psr(data, j, DiscreteCdf::gaussian_on_codes(prediction, sd, info.levels));
        } else {
            r = continuous_residual(data, j, prediction);
            const auto y = data.column(j);
            const double spread = std::sqrt((y.array() - y.mean()).square().mean());
            const double rsd = std::sqrt((r.array() - r.mean()).square().mean());
            if (!(rsd > 1e-6 * spread))
                throw Error(ErrorKind::degenerate_variance, "'" + info.name + "' is fully determined by its parents");
            if (options.use_psr) r = psr(data, j, GaussianCdf(prediction, sd));
        }
        values.col(static_cast<Eigen::Index>(k)) = r;
        names.push_back(info.name);
        roles.push_back(info.role);
    }
    return ResidualMatrix(std::move(names), std::move(values), std::move(roles));
}

}  // namespace latentdag
