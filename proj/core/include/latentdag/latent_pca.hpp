#ifndef LATENTDAG_LATENT_PCA_HPP
#define LATENTDAG_LATENT_PCA_HPP

#include <latentdag/data.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace latentdag {

/// Full PCA of a column-standardized matrix via SVD. With Z = U S V^T,
/// scores = U S and loadings = V, so Z = scores * loadings^T.
struct PcaResult {
    Eigen::MatrixXd standardized;
    Eigen::MatrixXd scores;    // s x r, r = min(s, m)
    Eigen::MatrixXd loadings;  // m x r
    Eigen::VectorXd singular_values;
    Eigen::VectorXd eigenvalues;  // singular_values^2 / (s - 1), descending
    std::vector<std::string> names;
};

/// Each loading column's largest-magnitude entry is positive (first index on ties).
PcaResult pca(const ResidualMatrix& residuals);
PcaResult pca(const Eigen::MatrixXd& values, const std::vector<std::string>& names = {});

/// Optimal hard threshold for unknown noise level:
/// omega(beta) = 0.56 beta^3 - 0.95 beta^2 + 1.82 beta + 1.43, beta = min(s,m) / max(s,m).
double hard_threshold_omega(double beta);

/// Number of singular values strictly above omega(beta) * median(singular values).
std::size_t hard_threshold_ceiling(const Eigen::VectorXd& singular_values, std::size_t s, std::size_t m);

struct ParallelAnalysisResult {
    std::size_t q = 0;
    std::size_t ceiling_q = 0;
    std::size_t uncapped_q = 0;
    Eigen::VectorXd observed;   // eigenvalues of the standardized input
    Eigen::VectorXd threshold;  // per-rank quantile of permuted eigenvalues
};

/// Permutation parallel analysis: each column shuffled independently, n_perm times.
/// q counts leading observed eigenvalues above the per-rank quantile, capped at the
/// hard-threshold ceiling.
ParallelAnalysisResult parallel_analysis_detail(const ResidualMatrix& residuals, std::size_t n_perm, double quantile,
                                                std::uint64_t seed, std::size_t threads = 1);
std::size_t parallel_analysis(const ResidualMatrix& residuals, std::size_t n_perm, double quantile, std::uint64_t seed,
                              std::size_t threads = 1);

struct LatentConfig {
    std::size_t n_perm = 50;
    double quantile = 0.95;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    /// Drop outcome residual columns from the PCA input.
    bool exclude_outcomes = false;
};

struct LatentEstimate {
    Eigen::MatrixXd scores;    // s x q
    Eigen::MatrixXd loadings;  // m x q
    Eigen::VectorXd eigenvalues;      // leading q, descending
    Eigen::VectorXd all_eigenvalues;  // full spectrum
    std::size_t q = 0;
    std::size_t ceiling_q = 0;
    std::vector<std::string> input_names;  // residual columns that entered the PCA

    bool empty() const { return q == 0; }
};

/// PCA, hard-threshold ceiling and parallel analysis; keeps the top-q score columns.
LatentEstimate estimate_latents(const ResidualMatrix& residuals, const LatentConfig& config);

}  // namespace latentdag

#endif  // LATENTDAG_LATENT_PCA_HPP
