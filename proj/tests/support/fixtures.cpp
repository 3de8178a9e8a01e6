#include "fixtures.hpp"

#include <latentdag/random.hpp>

#include <algorithm>
#include <random>

namespace fixture {

using namespace latentdag;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
}

GroundTruth linear_truth(const std::vector<std::string>& nodes, const std::vector<std::pair<std::string, std::string>>& edges,
                         double coeff, const std::vector<std::string>& latents, const std::vector<std::string>& outcomes) {
    std::vector<NodeRole> roles(nodes.size(), NodeRole::predictor);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (std::find(outcomes.begin(), outcomes.end(), nodes[i]) != outcomes.end()) roles[i] = NodeRole::outcome;
    }
    Dag dag = Dag::from_named_edges(nodes, roles, edges);
    std::vector<NodeModel> params(dag.size());
    for (std::size_t i = 0; i < dag.size(); ++i) params[i].coeffs.assign(dag.parents(i).size(), coeff);
    GroundTruth truth;
    truth.sem = LinearSem(std::move(dag), std::move(params));
    truth.latent_names = latents;
    truth.outcome_names = outcomes;
    return truth;
}

GroundTruth chain_truth() { return linear_truth({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}); }

GroundTruth orthogonal_latents_truth(std::size_t n_observed, std::size_t n_latent, std::size_t children_per_latent,
                                     double edge_density, std::uint64_t seed) {
    const GroundTruth base = random_pleiotropic_truth(n_observed, n_latent, children_per_latent, edge_density, seed);
    const Dag& full = base.sem.dag();
    std::vector<bool> downstream(full.size(), false);
    std::vector<bool> latent_child(full.size(), false);
    for (std::size_t i : full.topological_order()) {
        const bool latent = base.is_latent(full.name(i));
        for (std::size_t c : full.children(i)) {
            if (latent || downstream[i]) downstream[c] = true;
            if (latent) latent_child[c] = true;
        }
    }
    std::vector<Edge> kept;
    for (const auto& e : full.edges()) {
        if (latent_child[e.to] && downstream[e.from]) continue;
        kept.push_back(e);
    }
    Dag dag(full.nodes(), full.roles(), kept);
    std::vector<NodeModel> params(dag.size());
    for (std::size_t i = 0; i < dag.size(); ++i) {
        params[i] = base.sem.params(i);
        params[i].coeffs.clear();
        for (std::size_t p : dag.parents(i)) params[i].coeffs.push_back(base.sem.coefficient(p, i));
    }
    GroundTruth truth{LinearSem(std::move(dag), std::move(params)), base.latent_names, base.outcome_names};
    truth.validate();
    return truth;
}

GroundTruth single_latent_truth(std::uint64_t seed) { return orthogonal_latents_truth(30, 1, 20, 0.1, seed); }

Dag observed_dag(const GroundTruth& truth) {
    const Dag& full = truth.sem.dag();
    std::vector<std::string> names;
    std::vector<NodeRole> roles;
    for (std::size_t i = 0; i < full.size(); ++i) {
        if (truth.is_latent(full.name(i))) continue;
        names.push_back(full.name(i));
        roles.push_back(full.role(i));
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& e : full.edges()) {
        if (truth.is_latent(full.name(e.from)) || truth.is_latent(full.name(e.to))) continue;
        edges.emplace_back(full.name(e.from), full.name(e.to));
    }
    return Dag::from_named_edges(names, roles, edges);
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "latentdag-tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixture
