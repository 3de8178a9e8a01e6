#ifndef LATENTDAG_EM_HPP
#define LATENTDAG_EM_HPP

#include <latentdag/latent_pca.hpp>
#include <latentdag/residuals.hpp>
#include <latentdag/search.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace latentdag {

/// Which coefficients produce the residuals that feed latent re-estimation.
enum class ResidualSource {
    averaged,  // bootstrap-averaged coefficients of the consensus graph
    refit      // least-squares refit of the consensus graph
};

struct EmConfig {
    /// Minimum BIC improvement to keep iterating. Negative selects the default
    /// 1e-6 * |initial BIC|; zero runs exactly max_iter iterations.
    double epsilon = -1.0;
    std::size_t max_iter = 20;
    bool latents_are_sources = true;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    Constraints constraints;
    BootstrapConfig bootstrap;  // seed and threads are overridden per iteration
    LatentConfig latent;        // seed and threads are overridden per iteration
    ResidualOptions residuals;
    ResidualSource residual_source = ResidualSource::averaged;
};

/// One structure-learning pass. Iteration 0 is the latent-free graph.
struct EmIterate {
    std::size_t iteration = 0;
    double bic_total = 0.0;    // over non-latent-estimate nodes
    double outcome_bic = 0.0;  // over outcome nodes only
    std::size_t q = 0;         // latent-estimate columns in this graph
    std::size_t edge_count = 0;
    bool accepted = false;     // improved on the previous iterate by more than epsilon
    DataMatrix data;           // observed columns plus this iterate's latent columns
    EnsembleGraph ensemble;
    ScoredGraph fitted;        // least-squares refit of the consensus graph
    LatentEstimate latents;    // the estimate whose columns were appended (empty at iteration 0)
};

struct EmTrace {
    std::vector<EmIterate> iterates;
    std::string stop_reason;
};

struct EmResult {
    EmTrace trace;
    std::size_t best = 0;  // index into trace.iterates with minimum bic_total
    bool latent_detected = false;
    double epsilon = 0.0;  // resolved tolerance

    const EmIterate& final_iterate() const { return trace.iterates.at(best); }
};

/// Alternates consensus structure learning over observed and latent-estimate columns
/// with latent re-estimation from clamped residuals, while total BIC improves.
EmResult run_em(const DataMatrix& data, const EmConfig& config);

/// Appends standardized score columns as continuous latent-estimate columns
/// named Ū1..Ūq (UTF-8). Throws ShapeMismatch and NameCollision.
DataMatrix append_latents(const DataMatrix& data, const LatentEstimate& latents);

std::string latent_column_name(std::size_t k);

/// Sum of node-wise BIC over nodes that are not latent estimates.
double score_graph(const ScoredGraph& graph, const DataMatrix& data);
/// Sum of node-wise BIC over outcome nodes.
double outcome_score(const ScoredGraph& graph, const DataMatrix& data);

}  // namespace latentdag

#endif  // LATENTDAG_EM_HPP
