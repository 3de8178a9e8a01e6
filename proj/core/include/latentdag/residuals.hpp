#ifndef LATENTDAG_RESIDUALS_HPP
#define LATENTDAG_RESIDUALS_HPP

#include <latentdag/data.hpp>
#include <latentdag/sem.hpp>

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace latentdag {

/// Per-sample conditional CDF of one node given its parents.
class ConditionalCdf {
public:
    virtual ~ConditionalCdf() = default;
    /// (F(y-), F(y)) for sample i observed at y.
    virtual std::pair<double, double> bounds(Eigen::Index sample, double y) const = 0;
};

/// N(mean_i, sd^2) per sample; continuous, so F(y-) = F(y).
class GaussianCdf final : public ConditionalCdf {
public:
    GaussianCdf(Eigen::VectorXd means, double sd);
    std::pair<double, double> bounds(Eigen::Index sample, double y) const override;

private:
    Eigen::VectorXd m_means;
    double m_sd;
};

/// Explicit per-sample level probabilities (rows: samples, cols: levels 0..L-1).
class DiscreteCdf final : public ConditionalCdf {
public:
    /// Throws InvalidCdf unless every row is non-negative and sums to 1.
    explicit DiscreteCdf(Eigen::MatrixXd probabilities);
    /// Gaussian on integer codes: level k covers (k - 0.5, k + 0.5], the end levels are open.
    static DiscreteCdf gaussian_on_codes(const Eigen::VectorXd& means, double sd, int levels);

    std::pair<double, double> bounds(Eigen::Index sample, double y) const override;

private:
    Eigen::MatrixXd m_cumulative;
};

/// intercept + sum over parents not in `clamp` of coeff * parent column.
/// Clamped parents contribute nothing beyond the intercept.
Eigen::VectorXd predict_node(const LinearSem& sem, const DataMatrix& data, std::size_t node,
                             const std::vector<std::size_t>& clamp = {});

/// data[node] - prediction. Throws KindMismatch for ordinal nodes.
Eigen::VectorXd continuous_residual(const DataMatrix& data, std::size_t node, const Eigen::VectorXd& prediction);

/// Probability-scale residual F(y-) + F(y) - 1 per sample, in [-1, 1].
/// Throws InvalidCdf when the CDF is out of [0, 1] or not monotone.
Eigen::VectorXd psr(const DataMatrix& data, std::size_t node, const ConditionalCdf& cdf);

struct ResidualOptions {
    /// Latent-estimate parents contribute a constant (their effect stays in the residual).
    bool clamp_latents = true;
    /// Use PSR for continuous nodes too (ordinal nodes always use PSR).
    bool use_psr = false;
};

/// One residual column per non-latent-estimate column of `data`, in column order.
/// `sem` must be defined over the same columns. Throws DegenerateVariance when a
/// continuous residual column is numerically zero.
ResidualMatrix residual_matrix(const DataMatrix& data, const LinearSem& sem, const ResidualOptions& options = {});

}  // namespace latentdag

#endif  // LATENTDAG_RESIDUALS_HPP
