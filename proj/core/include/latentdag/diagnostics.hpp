#ifndef LATENTDAG_DIAGNOSTICS_HPP
#define LATENTDAG_DIAGNOSTICS_HPP

#include <latentdag/data.hpp>
#include <latentdag/latent_pca.hpp>
#include <latentdag/search.hpp>
#include <latentdag/simulate.hpp>

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace latentdag {

enum class RmseScope { all_into_outcomes, true_drivers };

/// RMSE between estimated and true coefficients on edges into the truth's outcomes.
///
/// all_into_outcomes compares every parent candidate present in both graphs (true
/// latents that are absent from the estimate and latent estimates absent from the
/// truth are skipped); an edge missing on one side counts with coefficient 0.
/// true_drivers compares only the truth's observed direct parents of each outcome.
/// Throws NoOutcomeNodes.
double coefficient_rmse(const LinearSem& estimated, const GroundTruth& truth, RmseScope scope);
double coefficient_rmse(const EnsembleGraph& estimated, const GroundTruth& truth, RmseScope scope);

/// Adjusted R^2 of each true latent regressed on all score columns:
/// 1 - (1 - R^2)(s - 1)/(s - q - 1). Throws DegenerateInput.
std::map<std::string, double> latent_r2(const std::map<std::string, Eigen::VectorXd>& true_latents,
                                        const Eigen::MatrixXd& scores);
std::map<std::string, double> latent_r2(const std::map<std::string, Eigen::VectorXd>& true_latents,
                                        const LatentEstimate& estimate);

/// 1 / (1 - rho^2) where rho^2 is the R^2 of target on the other parents.
/// 1 for a singleton parent set; +infinity under perfect collinearity.
double vif(const DataMatrix& data, std::string_view outcome, const std::vector<std::string>& parent_set,
           std::string_view target_parent);

struct CapRecord {
    bool evaluable = false;
    double lhs = 0.0;    // confounded score - final score
    double k = 0.0;      // sum over outcomes of |X \ W| - |U|
    double bound = 0.0;  // k log(s)
    bool satisfied = false;
};

/// Likelihood-improvement cap for deconfounded outcome models. X is the set of
/// observed variables adjacent to a true latent (outcome excluded), W the outcome's
/// parents in the confounded graph. Scores are outcome-node BICs.
/// Throws NonComparableScores for non-finite scores.
CapRecord improvement_cap(double confounded_score, double final_score, const GroundTruth& truth,
                          const Dag& confounded_graph, std::size_t n_samples);

struct StructuralMetrics {
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t false_negative = 0;
    std::size_t skeleton_true_positive = 0;
    std::size_t skeleton_false_positive = 0;
    std::size_t skeleton_false_negative = 0;
    double skeleton_precision = 1.0;  // 1 when the estimate has no edges
    double skeleton_recall = 0.0;
    double skeleton_f1 = 0.0;
};

/// Compares edge sets after dropping latent-estimate nodes from `estimated` and
/// `latent_names` from `truth`. Throws NodeSetMismatch.
StructuralMetrics structural_metrics(const Dag& estimated, const Dag& truth,
                                     const std::vector<std::string>& latent_names = {});

/// Parents of `outcome` in `estimated` that are neither true parents nor latent estimates.
std::size_t false_positive_parents(const Dag& estimated, const GroundTruth& truth, std::string_view outcome);

/// Mean VIF over the parents of each outcome in a fitted graph.
double mean_outcome_vif(const DataMatrix& data, const Dag& dag);

/// Local linear LOESS with tricube weights.
std::vector<double> loess(const std::vector<double>& x, const std::vector<double>& y, double span = 0.75);

}  // namespace latentdag

#endif  // LATENTDAG_DIAGNOSTICS_HPP
