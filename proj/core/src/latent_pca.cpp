#include <latentdag/error.hpp>
#include <latentdag/latent_pca.hpp>
#include <latentdag/parallel.hpp>
#include <latentdag/random.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace latentdag {

PcaResult pca(const ResidualMatrix& residuals) { return pca(residuals.values(), residuals.names()); }

PcaResult pca(const Eigen::MatrixXd& values, const std::vector<std::string>& names) {
    if (values.rows() < 2 || values.cols() < 1)
        throw Error(ErrorKind::degenerate_input, "PCA needs at least 2 rows and 1 column");
    PcaResult out;
    out.names = names;
    out.standardized = standardize_columns(values, names);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(out.standardized, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::MatrixXd u = svd.matrixU();
    Eigen::MatrixXd v = svd.matrixV();
    out.singular_values = svd.singularValues();
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < v.rows(); ++i) {
            if (std::abs(v(i, k)) > std::abs(v(arg, k))) arg = i;
        }
        if (v(arg, k) < 0.0) {
            v.col(k) *= -1.0;
            u.col(k) *= -1.0;
        }
    }
    out.scores = u * out.singular_values.asDiagonal();
    out.loadings = std::move(v);
    out.eigenvalues = out.singular_values.array().square() / static_cast<double>(values.rows() - 1);
    return out;
}

double hard_threshold_omega(double beta) {
    return 0.56 * beta * beta * beta - 0.95 * beta * beta + 1.82 * beta + 1.43;
}

std::size_t hard_threshold_ceiling(const Eigen::VectorXd& singular_values, std::size_t s, std::size_t m) {
    if (singular_values.size() == 0 || s == 0 || m == 0) return 0;
    const double beta = static_cast<double>(std::min(s, m)) / static_cast<double>(std::max(s, m));
    std::vector<double> sv(singular_values.data(), singular_values.data() + singular_values.size());
    std::sort(sv.begin(), sv.end());
    const std::size_t n = sv.size();
    const double median = n % 2 ? sv[n / 2] : 0.5 * (sv[n / 2 - 1] + sv[n / 2]);
    const double tau = hard_threshold_omega(beta) * median;
    return static_cast<std::size_t>(std::count_if(sv.begin(), sv.end(), [&](double x) { return x > tau; }));
}

namespace {

// Linear interpolation between order statistics (R type 7).
double quantile_of(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Eigen::VectorXd correlation_spectrum(const Eigen::MatrixXd& standardized) {
    const Eigen::MatrixXd corr =
        (standardized.transpose() * standardized) / static_cast<double>(standardized.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().reverse();
}

}  // namespace

ParallelAnalysisResult parallel_analysis_detail(const ResidualMatrix& residuals, std::size_t n_perm, double quantile,
                                                std::uint64_t seed, std::size_t threads) {
    if (n_perm < 1) throw Error(ErrorKind::invalid_config, "n_perm must be at least 1");
    if (!(quantile > 0.0 && quantile < 1.0)) throw Error(ErrorKind::invalid_config, "quantile must lie in (0, 1)");
    const PcaResult full = pca(residuals);
    const Eigen::MatrixXd& z = full.standardized;
    const auto s = static_cast<std::size_t>(z.rows());
    const auto m = static_cast<std::size_t>(z.cols());
    const auto rank = static_cast<std::size_t>(full.eigenvalues.size());

    std::vector<Eigen::VectorXd> permuted(n_perm);
    parallel_for(n_perm, threads, [&](std::size_t p) {
        Rng rng = make_rng(seed, "permutation", p);
        Eigen::MatrixXd shuffled(z.rows(), z.cols());
        std::vector<Eigen::Index> order(s);
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t i = 0; i < s; ++i) shuffled(static_cast<Eigen::Index>(i), j) = z(order[i], j);
        }
        permuted[p] = correlation_spectrum(shuffled);
    });

    ParallelAnalysisResult out;
    out.observed = full.eigenvalues;
    out.threshold.resize(static_cast<Eigen::Index>(rank));
    std::vector<double> column(n_perm);
    for (std::size_t k = 0; k < rank; ++k) {
        for (std::size_t p = 0; p < n_perm; ++p) column[p] = permuted[p](static_cast<Eigen::Index>(k));
        out.threshold(static_cast<Eigen::Index>(k)) = quantile_of(column, quantile);
    }
    while (out.uncapped_q < rank &&
           out.observed(static_cast<Eigen::Index>(out.uncapped_q)) > out.threshold(static_cast<Eigen::Index>(out.uncapped_q)))
        ++out.uncapped_q;
    out.ceiling_q = hard_threshold_ceiling(full.singular_values, s, m);
    out.q = std::min(out.uncapped_q, out.ceiling_q);
    return out;
}

std::size_t parallel_analysis(const ResidualMatrix& residuals, std::size_t n_perm, double quantile, std::uint64_t seed,
                              std::size_t threads) {
    return parallel_analysis_detail(residuals, n_perm, quantile, seed, threads).q;
}

LatentEstimate estimate_latents(const ResidualMatrix& residuals, const LatentConfig& config) {
    const ResidualMatrix input = config.exclude_outcomes ? residuals.without_role(NodeRole::outcome) : residuals;
    const PcaResult full = pca(input);
    const ParallelAnalysisResult pa =
        parallel_analysis_detail(input, config.n_perm, config.quantile, config.seed, config.threads);

    LatentEstimate out;
    out.q = pa.q;
    out.ceiling_q = pa.ceiling_q;
    out.input_names = input.names();
    const auto q = static_cast<Eigen::Index>(out.q);
    out.scores = full.scores.leftCols(q);
    out.loadings = full.loadings.leftCols(q);
    out.eigenvalues = full.eigenvalues.head(q);
    out.all_eigenvalues = full.eigenvalues;
    return out;
}

}  // namespace latentdag
