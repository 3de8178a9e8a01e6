#include <latentdag/em.hpp>
#include <latentdag/error.hpp>
#include <latentdag/random.hpp>

#include <cmath>

namespace latentdag {

std::string latent_column_name(std::size_t k) { return "Ū" + std::to_string(k); }

DataMatrix append_latents(const DataMatrix& data, const LatentEstimate& latents) {
    if (latents.q == 0) return data;
    if (latents.scores.rows() != data.rows())
        throw Error(ErrorKind::shape_mismatch, "latent scores and data have different row counts");
    const auto q = static_cast<Eigen::Index>(latents.q);
    std::vector<std::string> names;
    for (std::size_t k = 1; k <= latents.q; ++k) names.push_back(latent_column_name(k));
    for (const auto& n : names) {
        if (data.find(n)) throw Error(ErrorKind::name_collision, "column '" + n + "' already exists");
    }
    const Eigen::MatrixXd scores = standardize_columns(latents.scores.leftCols(q), names);

    auto cols = data.columns();
    for (const auto& n : names) cols.push_back({n, VariableKind::continuous, 0, NodeRole::latent_estimate});
    Eigen::MatrixXd values(data.rows(), data.cols() + q);
    values << data.values(), scores;
    return DataMatrix(std::move(cols), std::move(values));
}

double score_graph(const ScoredGraph& graph, const DataMatrix& data) {
    double total = 0.0;
    for (std::size_t j = 0; j < graph.dag.size(); ++j) {
        if (data.info(j).role != NodeRole::latent_estimate) total += graph.node_bic.at(j);
    }
    return total;
}

double outcome_score(const ScoredGraph& graph, const DataMatrix& data) {
    double total = 0.0;
    for (std::size_t j = 0; j < graph.dag.size(); ++j) {
        if (data.info(j).role == NodeRole::outcome) total += graph.node_bic.at(j);
    }
    return total;
}

namespace {

EmIterate learn_iterate(const DataMatrix& data, const LatentEstimate& latents, const EmConfig& config,
                        std::size_t iteration) {
    EmIterate it;
    it.iteration = iteration;
    it.data = append_latents(data, latents);
    it.latents = latents;
    it.q = latents.q;

    Constraints constraints = config.constraints;
    if (config.latents_are_sources) {
        for (std::size_t k = 1; k <= latents.q; ++k) constraints.forced_sources.push_back(latent_column_name(k));
    }
    BootstrapConfig boot = config.bootstrap;
    boot.seed = derive_seed(config.seed, "em-bootstrap", iteration);
    boot.threads = config.threads;
    it.ensemble = bootstrap_consensus(it.data, constraints, boot);
    it.fitted = fit_dag(it.data, it.ensemble.consensus_dag);
    it.bic_total = score_graph(it.fitted, it.data);
    it.outcome_bic = outcome_score(it.fitted, it.data);
    it.edge_count = it.ensemble.consensus_dag.edge_count();
    return it;
}

LatentEstimate next_latents(const EmIterate& it, const EmConfig& config) {
    const LinearSem& sem =
        config.residual_source == ResidualSource::averaged ? it.ensemble.averaged_sem : it.fitted.sem;
    const ResidualMatrix r = residual_matrix(it.data, sem, config.residuals);
    LatentConfig lc = config.latent;
    lc.seed = derive_seed(config.seed, "em-latent", it.iteration);
    lc.threads = config.threads;
    return estimate_latents(r, lc);
}

}  // namespace

EmResult run_em(const DataMatrix& data, const EmConfig& config) {
    if (config.max_iter < 1) throw Error(ErrorKind::invalid_config, "max_iter must be at least 1");
    if (!std::isfinite(config.epsilon)) throw Error(ErrorKind::invalid_config, "epsilon must be finite");
    for (const auto& c : data.columns()) {
        if (c.role == NodeRole::latent_estimate)
            throw Error(ErrorKind::invalid_roles, "input already contains latent-estimate column '" + c.name + "'");
    }

    EmResult result;
    auto& iterates = result.trace.iterates;
    iterates.push_back(learn_iterate(data, LatentEstimate{}, config, 0));
    iterates.back().accepted = true;

    const bool fixed = config.epsilon == 0.0;
    result.epsilon = config.epsilon < 0.0 ? 1e-6 * std::abs(iterates.front().bic_total) : config.epsilon;

    LatentEstimate latents = next_latents(iterates.front(), config);
    if (latents.empty()) {
        result.trace.stop_reason = "no latent detected";
        return result;
    }
    result.latent_detected = true;

    double previous = iterates.front().bic_total;
    for (std::size_t k = 1; k <= config.max_iter; ++k) {
        iterates.push_back(learn_iterate(data, latents, config, k));
        EmIterate& it = iterates.back();
        it.accepted = previous - it.bic_total > result.epsilon;
        if (it.bic_total < iterates[result.best].bic_total) result.best = iterates.size() - 1;
        if (!fixed && !it.accepted) {
            result.trace.stop_reason = "score stopped improving";
            return result;
        }
        previous = it.bic_total;
        if (k == config.max_iter) break;
        latents = next_latents(it, config);
        if (latents.empty()) {
            result.trace.stop_reason = "no latent detected";
            return result;
        }
    }
    result.trace.stop_reason = "reached max_iter";
    return result;
}

}  // namespace latentdag
