#include <latentdag/error.hpp>
#include <latentdag/random.hpp>
#include <latentdag/simulate.hpp>

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace latentdag {

namespace {

constexpr double kCoeffMin = 0.5;
constexpr double kCoeffMax = 1.5;
constexpr std::uint64_t kBenchmarkParamSeed = 20200715;

double draw_magnitude(Rng& rng) { return std::uniform_real_distribution<double>(kCoeffMin, kCoeffMax)(rng); }

double draw_signed(Rng& rng) {
    const double m = draw_magnitude(rng);
    return std::bernoulli_distribution(0.5)(rng) ? m : -m;
}

}  // namespace

void GroundTruth::validate() const {
    const Dag& dag = sem.dag();
    for (const auto& l : latent_names) {
        const std::size_t idx = dag.index(l);
        if (std::find(outcome_names.begin(), outcome_names.end(), l) != outcome_names.end())
            throw Error(ErrorKind::invalid_config, "latent '" + l + "' is also an outcome");
        if (dag.children(idx).size() < 2)
            throw Error(ErrorKind::invalid_config, "latent '" + l + "' needs at least 2 children");
    }
    for (const auto& o : outcome_names) dag.index(o);
}

std::vector<std::string> GroundTruth::observed_names() const {
    std::vector<std::string> out;
    for (const auto& n : sem.dag().nodes()) {
        if (!is_latent(n)) out.push_back(n);
    }
    return out;
}

bool GroundTruth::is_latent(std::string_view name) const {
    return std::find(latent_names.begin(), latent_names.end(), name) != latent_names.end();
}

SimBundle sample_sem(const GroundTruth& truth, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw Error(ErrorKind::invalid_config, "n_samples must be at least 1");
    truth.validate();
    const Dag& dag = truth.sem.dag();
    const auto n = static_cast<Eigen::Index>(n_samples);
    Eigen::MatrixXd values(n, static_cast<Eigen::Index>(dag.size()));

    Rng rng = make_rng(seed, "sample_sem");
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t node : dag.topological_order()) {
        const NodeModel& p = truth.sem.params(node);
        const auto& parents = dag.parents(node);
        auto col = values.col(static_cast<Eigen::Index>(node));
        col.setConstant(p.intercept);
        for (std::size_t k = 0; k < parents.size(); ++k)
            col += p.coeffs[k] * values.col(static_cast<Eigen::Index>(parents[k]));
        for (Eigen::Index i = 0; i < n; ++i) col(i) += p.noise_sd * normal(rng);
    }

    std::vector<ColumnInfo> cols;
    for (std::size_t j = 0; j < dag.size(); ++j) {
        const auto& name = dag.name(j);
        const bool outcome =
            std::find(truth.outcome_names.begin(), truth.outcome_names.end(), name) != truth.outcome_names.end();
        cols.push_back({name, VariableKind::continuous, 0, outcome ? NodeRole::outcome : NodeRole::predictor});
    }
    DataMatrix full(std::move(cols), std::move(values));
    DataMatrix observed = full.without(truth.latent_names);
    return SimBundle{std::move(full), std::move(observed), truth, seed};
}

GroundTruth confounded_benchmark_truth(std::size_t children_per_latent) {
    if (children_per_latent < 1) throw Error(ErrorKind::invalid_config, "children_per_latent must be at least 1");
    std::vector<std::string> nodes{"U1", "U2", "V1", "V2"};
    for (std::size_t k = 1; k <= children_per_latent; ++k) nodes.push_back("A" + std::to_string(k));
    for (std::size_t k = 1; k <= children_per_latent; ++k) nodes.push_back("B" + std::to_string(k));
    nodes.push_back("Z");

    std::vector<NodeRole> roles(nodes.size(), NodeRole::predictor);
    roles.back() = NodeRole::outcome;

    // The driver block and the extra children draw from separate streams, so the
    // driver block is the same whatever the number of children.
    Rng core = make_rng(kBenchmarkParamSeed, "confounded_benchmark/core");
    Rng extra = make_rng(kBenchmarkParamSeed, "confounded_benchmark/children");
    std::vector<std::pair<std::string, std::string>> edges;
    std::unordered_map<std::string, double> weight;
    std::unordered_map<std::string, double> noise{{"U1", 1.0}, {"U2", 1.0}};
    // Edges on confounding paths get positive weights so no path cancels another;
    // edges into the non-driver children carry a random sign.
    auto add = [&](const std::string& from, const std::string& to, double w) {
        edges.emplace_back(from, to);
        weight[from + "->" + to] = w;
    };
    for (const char* u : {"U1", "U2"}) {
        add(u, "V1", draw_magnitude(core));
        add(u, "V2", draw_magnitude(core));
        add(u, "Z", draw_magnitude(core));
    }
    add("V1", "Z", draw_magnitude(core));
    add("V2", "Z", draw_magnitude(core));
    for (const char* v : {"V1", "V2", "Z"}) noise[v] = draw_magnitude(core);
    for (std::size_t k = 1; k <= children_per_latent; ++k) {
        for (const char* u : {"U1", "U2"}) {
            const std::string child = (u[1] == '1' ? "A" : "B") + std::to_string(k);
            add(u, child, draw_signed(extra));
            noise[child] = draw_magnitude(extra);
        }
    }

    Dag dag = Dag::from_named_edges(nodes, roles, edges);
    std::vector<NodeModel> params(dag.size());
    for (std::size_t i = 0; i < dag.size(); ++i) {
        auto& p = params[i];
        for (std::size_t parent : dag.parents(i)) p.coeffs.push_back(weight.at(dag.name(parent) + "->" + dag.name(i)));
        p.noise_sd = noise.at(dag.name(i));
    }
    GroundTruth truth{LinearSem(std::move(dag), std::move(params)), {"U1", "U2"}, {"Z"}};
    truth.validate();
    return truth;
}

SimBundle confounded_benchmark(std::size_t n_samples, std::uint64_t seed, std::size_t children_per_latent) {
    return sample_sem(confounded_benchmark_truth(children_per_latent), n_samples, seed);
}

GroundTruth random_pleiotropic_truth(std::size_t n_observed,
                                     std::size_t n_latent,
                                     std::size_t children_per_latent,
                                     double edge_density,
                                     std::uint64_t seed) {
    if (n_observed < 1) throw Error(ErrorKind::invalid_config, "need at least one observed variable");
    if (children_per_latent < 2) throw Error(ErrorKind::invalid_config, "children_per_latent must be at least 2");
    if (n_latent > 0 && children_per_latent > n_observed)
        throw Error(ErrorKind::invalid_config, "children_per_latent exceeds the number of observed variables");
    if (!(edge_density >= 0.0 && edge_density <= 1.0))
        throw Error(ErrorKind::invalid_config, "edge_density must lie in [0, 1]");

    Rng rng = make_rng(seed, "random_pleiotropic_truth");
    std::vector<std::string> nodes;
    for (std::size_t l = 1; l <= n_latent; ++l) nodes.push_back("L" + std::to_string(l));
    for (std::size_t v = 1; v <= n_observed; ++v) nodes.push_back("X" + std::to_string(v));

    // Edges follow a random causal order over the observed block.
    std::vector<std::size_t> order(n_observed);
    std::iota(order.begin(), order.end(), n_latent);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Edge> edges;
    std::bernoulli_distribution coin(edge_density);
    for (std::size_t a = 0; a < n_observed; ++a) {
        for (std::size_t b = a + 1; b < n_observed; ++b) {
            if (coin(rng)) edges.push_back({order[a], order[b]});
        }
    }
    std::vector<std::size_t> observed(n_observed);
    std::iota(observed.begin(), observed.end(), n_latent);
    for (std::size_t l = 0; l < n_latent; ++l) {
        std::shuffle(observed.begin(), observed.end(), rng);
        for (std::size_t c = 0; c < children_per_latent; ++c) edges.push_back({l, observed[c]});
    }

    Dag dag(nodes, {}, std::move(edges));
    std::vector<NodeModel> params(dag.size());
    for (std::size_t i = 0; i < dag.size(); ++i) {
        auto& p = params[i];
        for (std::size_t k = 0; k < dag.parents(i).size(); ++k) p.coeffs.push_back(draw_signed(rng));
        p.noise_sd = i < n_latent ? 1.0 : std::uniform_real_distribution<double>(kCoeffMin, kCoeffMax)(rng);
    }
    std::vector<std::string> latents(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(n_latent));
    GroundTruth truth{LinearSem(std::move(dag), std::move(params)), std::move(latents), {}};
    truth.validate();
    return truth;
}

}  // namespace latentdag
