#include <latentdag/error.hpp>
#include <latentdag/score.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace latentdag {

namespace {

constexpr double kRankThreshold = 1e-10;
// Residual sd below this fraction of the response sd counts as an exact fit.
constexpr double kDegenerateRatio = 1e-6;

double gaussian_loglik(double rss, double s) {
    const double var = rss / s;
    if (var <= 0.0) return std::numeric_limits<double>::infinity();
    return -0.5 * s * (std::log(2.0 * std::numbers::pi * var) + 1.0);
}

}  // namespace

OlsFit fit_node(const DataMatrix& data, std::size_t node, std::span<const std::size_t> parents) {
    const Eigen::Index s = data.rows();
    const auto p = static_cast<Eigen::Index>(parents.size());
    const auto& name = data.info(node).name;
    if (s <= p + 2)
        throw Error(ErrorKind::rank_deficient,
                    "'" + name + "' has " + std::to_string(p) + " parents but only " + std::to_string(s) + " samples");

    const Eigen::VectorXd y = data.column(node);
    const double y_mean = y.mean();
    if ((y.array() - y_mean).abs().maxCoeff() == 0.0)
        throw Error(ErrorKind::degenerate_variance, "'" + name + "' is constant");

    Eigen::MatrixXd design(s, p + 1);
    design.col(0).setOnes();
    for (Eigen::Index k = 0; k < p; ++k) {
        if (parents[static_cast<std::size_t>(k)] == node)
            throw Error(ErrorKind::invalid_config, "'" + name + "' cannot be its own parent");
        design.col(k + 1) = data.column(parents[static_cast<std::size_t>(k)]);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < p + 1) throw Error(ErrorKind::rank_deficient, "collinear parent set for '" + name + "'");
    const Eigen::VectorXd beta = qr.solve(y);
    const double rss = (y - design * beta).squaredNorm();

    OlsFit fit;
    fit.intercept = beta(0);
    fit.coeffs.assign(beta.data() + 1, beta.data() + beta.size());
    fit.noise_sd = std::sqrt(rss / static_cast<double>(s));
    fit.loglik = gaussian_loglik(rss, static_cast<double>(s));
    return fit;
}

namespace {
std::vector<std::size_t> resolve(const DataMatrix& data, const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& n : names) out.push_back(data.index(n));
    return out;
}
}  // namespace

OlsFit fit_node(const DataMatrix& data, std::string_view node, const std::vector<std::string>& parents) {
    const auto idx = resolve(data, parents);
    return fit_node(data, data.index(node), idx);
}

double bic_from_rss(double rss, std::size_t n_samples, std::size_t n_parents) {
    const double s = static_cast<double>(n_samples);
    return -2.0 * gaussian_loglik(rss, s) + static_cast<double>(n_parents + 2) * std::log(s);
}

double node_bic(const DataMatrix& data, std::size_t node, std::span<const std::size_t> parents) {
    const OlsFit fit = fit_node(data, node, parents);
    const auto y = data.column(node);
    const double sd = std::sqrt((y.array() - y.mean()).square().mean());
    if (fit.noise_sd <= kDegenerateRatio * sd)
        throw Error(ErrorKind::degenerate_variance, "exact fit for '" + data.info(node).name + "'");
    const double s = static_cast<double>(data.rows());
    return -2.0 * fit.loglik + static_cast<double>(parents.size() + 2) * std::log(s);
}

double node_bic(const DataMatrix& data, std::string_view node, const std::vector<std::string>& parents) {
    const auto idx = resolve(data, parents);
    return node_bic(data, data.index(node), idx);
}

ScoredGraph fit_dag(const DataMatrix& data, const Dag& dag) {
    if (dag.size() != static_cast<std::size_t>(data.cols()))
        throw Error(ErrorKind::shape_mismatch, "graph and data have different variable counts");
    for (std::size_t j = 0; j < dag.size(); ++j) {
        if (dag.name(j) != data.info(j).name)
            throw Error(ErrorKind::node_set_mismatch, "graph node '" + dag.name(j) + "' does not match column order");
    }
    ScoredGraph out{dag, {}, 0.0, {}};
    std::vector<NodeModel> params(dag.size());
    out.node_bic.resize(dag.size());
    for (std::size_t j = 0; j < dag.size(); ++j) {
        const auto& parents = dag.parents(j);
        const OlsFit fit = fit_node(data, j, parents);
        out.node_bic[j] = node_bic(data, j, parents);
        params[j] = NodeModel{fit.intercept, fit.coeffs, fit.noise_sd};
        out.bic_total += out.node_bic[j];
    }
    out.sem = LinearSem(dag, std::move(params));
    return out;
}

GramScorer::GramScorer(const DataMatrix& data) : m_samples(static_cast<std::size_t>(data.rows())) {
    const Eigen::MatrixXd centred = data.values().rowwise() - data.values().colwise().mean();
    m_cross = centred.transpose() * centred;
}

std::size_t GramScorer::KeyHash::operator()(const std::vector<std::uint32_t>& key) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto v : key) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

double GramScorer::local_bic(std::size_t node, std::span<const std::size_t> sorted_parents) {
    std::vector<std::uint32_t> key;
    key.reserve(sorted_parents.size() + 1);
    key.push_back(static_cast<std::uint32_t>(node));
    for (auto p : sorted_parents) key.push_back(static_cast<std::uint32_t>(p));
    auto it = m_cache.find(key);
    if (it != m_cache.end()) return it->second;
    const double score = compute(node, sorted_parents);
    m_cache.emplace(std::move(key), score);
    return score;
}

double GramScorer::compute(std::size_t node, std::span<const std::size_t> parents) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto p = static_cast<Eigen::Index>(parents.size());
    if (m_samples <= parents.size() + 2) return inf;
    const auto y = static_cast<Eigen::Index>(node);
    const double syy = m_cross(y, y);
    if (!(syy > 0.0)) return inf;

    double rss = syy;
    if (p > 0) {
        Eigen::MatrixXd a(p, p);
        Eigen::VectorXd b(p);
        for (Eigen::Index i = 0; i < p; ++i) {
            const auto pi = static_cast<Eigen::Index>(parents[static_cast<std::size_t>(i)]);
            b(i) = m_cross(pi, y);
            for (Eigen::Index j = 0; j < p; ++j) a(i, j) = m_cross(pi, static_cast<Eigen::Index>(parents[static_cast<std::size_t>(j)]));
        }
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) return inf;
        const Eigen::MatrixXd l = llt.matrixL();
        for (Eigen::Index k = 0; k < p; ++k) {
            // Pivot relative to the column's own variance: 1 - R^2 of parent k on earlier parents.
            if (!(l(k, k) * l(k, k) > kRankThreshold * a(k, k))) return inf;
        }
        const Eigen::VectorXd z = llt.matrixL().solve(b);
        rss = syy - z.squaredNorm();
    }
    if (!(rss > kDegenerateRatio * kDegenerateRatio * syy)) return inf;
    return bic_from_rss(rss, m_samples, parents.size());
}

}  // namespace latentdag
