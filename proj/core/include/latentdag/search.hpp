#ifndef LATENTDAG_SEARCH_HPP
#define LATENTDAG_SEARCH_HPP

#include <latentdag/data.hpp>
#include <latentdag/score.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace latentdag {

using NamedEdge = std::pair<std::string, std::string>;

/// Structural constraints. Outcome columns are always sink-only; nodes listed in
/// `forced_sources` never receive parents.
struct Constraints {
    std::vector<NamedEdge> forbidden;
    std::vector<NamedEdge> required;
    std::vector<std::string> forced_sources;
};

struct SearchConfig {
    std::size_t max_in_degree = 8;
    std::size_t restarts = 5;
    std::uint64_t seed = 0;
};

/// Greedy add/delete/reverse search minimizing total BIC, with random-perturbation
/// restarts from the incumbent. Returns a least-squares fit of the best graph.
/// Throws InvalidConstraints when the constraints contradict each other.
ScoredGraph hill_climb(const DataMatrix& data, const Constraints& constraints, const SearchConfig& config);

/// Detailed result used by tests: BIC after every accepted move of the first climb.
struct ClimbTrace {
    ScoredGraph graph;
    std::vector<double> accepted_scores;
};
ClimbTrace hill_climb_traced(const DataMatrix& data, const Constraints& constraints, const SearchConfig& config);

/// True when no single legal add/delete/reverse move lowers the Gram-based BIC by more than `tol`.
bool is_local_optimum(const DataMatrix& data, const Dag& dag, const Constraints& constraints,
                      std::size_t max_in_degree, double tol = 1e-9);

struct BootstrapConfig {
    std::size_t n_boot = 50;
    double threshold = 0.4;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    SearchConfig search;
};

/// Edge-frequency summary over bootstrap replicates.
struct EnsembleGraph {
    std::map<std::pair<std::size_t, std::size_t>, double> edge_frequency;  // directed
    Dag consensus_dag;
    LinearSem averaged_sem;
    double threshold = 0.4;
    std::size_t n_boot = 0;

    double directed_frequency(std::size_t from, std::size_t to) const;
    /// Frequency of the edge in either orientation.
    double combined_frequency(std::size_t a, std::size_t b) const;
};

/// Row-resampling bootstrap, hill climbing per replicate, consensus by threshold on
/// combined frequency, orientation by majority, then removal of the weakest edge on
/// any remaining cycle. Coefficients are averaged over replicates containing the edge.
EnsembleGraph bootstrap_consensus(const DataMatrix& data, const Constraints& constraints, const BootstrapConfig& config);

/// Same, also returning each replicate's fitted graph.
EnsembleGraph bootstrap_consensus(const DataMatrix& data, const Constraints& constraints,
                                  const BootstrapConfig& config, std::vector<ScoredGraph>* replicates);

}  // namespace latentdag

#endif  // LATENTDAG_SEARCH_HPP
