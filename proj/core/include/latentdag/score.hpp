#ifndef LATENTDAG_SCORE_HPP
#define LATENTDAG_SCORE_HPP

#include <latentdag/data.hpp>
#include <latentdag/sem.hpp>

#include <Eigen/Dense>

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace latentdag {

struct OlsFit {
    double intercept = 0.0;
    std::vector<double> coeffs;
    double noise_sd = 0.0;  // ML estimate sqrt(RSS / s)
    double loglik = 0.0;    // Gaussian log-likelihood at the fit
};

/// Least squares of `node` on `parents` with intercept (column-pivoted QR).
/// Throws DegenerateVariance for a constant response and RankDeficient for
/// collinear parents or s <= |parents| + 2.
OlsFit fit_node(const DataMatrix& data, std::size_t node, std::span<const std::size_t> parents);
OlsFit fit_node(const DataMatrix& data, std::string_view node, const std::vector<std::string>& parents);

/// -2 loglik + (|parents| + 2) log(s). Lower is better.
/// Throws DegenerateVariance when the fit is exact.
double node_bic(const DataMatrix& data, std::size_t node, std::span<const std::size_t> parents);
double node_bic(const DataMatrix& data, std::string_view node, const std::vector<std::string>& parents);

double bic_from_rss(double rss, std::size_t n_samples, std::size_t n_parents);

/// Graph with per-node least-squares parameters and its decomposable BIC.
struct ScoredGraph {
    Dag dag;
    LinearSem sem;
    double bic_total = 0.0;
    std::vector<double> node_bic;  // per node; latent estimates included
};

/// Fits every node of `dag` by least squares on `data` (columns matched by name order).
ScoredGraph fit_dag(const DataMatrix& data, const Dag& dag);

/// Local BIC from centred cross-products; equals node_bic up to round-off.
/// Caches scores per (node, parent set). Not thread-safe; use one per search.
class GramScorer {
public:
    explicit GramScorer(const DataMatrix& data);

    std::size_t n_samples() const { return m_samples; }
    std::size_t n_vars() const { return static_cast<std::size_t>(m_cross.cols()); }

    /// +infinity when the parent set is collinear or the fit is exact.
    double local_bic(std::size_t node, std::span<const std::size_t> sorted_parents);

    std::size_t cache_size() const { return m_cache.size(); }

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<std::uint32_t>& key) const noexcept;
    };

    double compute(std::size_t node, std::span<const std::size_t> parents) const;

    std::size_t m_samples = 0;
    Eigen::MatrixXd m_cross;  // centred X^T X
    std::unordered_map<std::vector<std::uint32_t>, double, KeyHash> m_cache;
};

}  // namespace latentdag

#endif  // LATENTDAG_SCORE_HPP
