#include "fixtures.hpp"
#include "oracles.hpp"

#include <latentdag/error.hpp>
#include <latentdag/random.hpp>
#include <latentdag/score.hpp>
#include <latentdag/search.hpp>
#include <latentdag/simulate.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace latentdag;

namespace {

using Skeleton = std::set<std::pair<std::string, std::string>>;

Skeleton skeleton(const Dag& dag) {
    Skeleton out;
    for (const auto& e : dag.edges()) {
        const auto& a = dag.name(e.from);
        const auto& b = dag.name(e.to);
        out.insert(a < b ? std::pair{a, b} : std::pair{b, a});
    }
    return out;
}

Eigen::MatrixXd parent_columns(const DataMatrix& data, const std::vector<std::size_t>& parents) {
    Eigen::MatrixXd x(data.rows(), static_cast<Eigen::Index>(parents.size()));
    for (std::size_t k = 0; k < parents.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = data.column(parents[k]);
    return x;
}

double oracle_total_bic(const DataMatrix& data, const Dag& dag) {
    double total = 0.0;
    for (std::size_t j = 0; j < dag.size(); ++j)
        total += oracle::gaussian_bic(parent_columns(data, dag.parents(j)), data.column(j));
    return total;
}

DataMatrix sampled(const GroundTruth& truth, std::size_t n, std::uint64_t seed) {
    return sample_sem(truth, n, seed).observed_data;
}

// Random DAG over `n` nodes: edges only from lower to higher index in a shuffled order.
Dag random_dag(std::size_t n, double density, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::bernoulli_distribution coin(density);
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (coin(rng)) edges.push_back({perm[a], perm[b]});
        }
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("N" + std::to_string(i));
    return Dag(names, {}, edges);
}

}  // namespace

TEST_SUITE("score_search") {

TEST_CASE("fit_node rejects a constant response") {
    Eigen::MatrixXd v(20, 2);
    v.col(0).setConstant(3.0);
    v.col(1) = fixture::gaussian(20, 1, 1);
    const DataMatrix d = DataMatrix::continuous({"Y", "X"}, v);
    CHECK(fixture::thrown_kind([&] { fit_node(d, "Y", {}); }) == ErrorKind::degenerate_variance);
}

TEST_CASE("fit_node recovers an exact line") {
    Eigen::MatrixXd v(30, 2);
    v.col(0) = fixture::gaussian(30, 1, 2);
    v.col(1) = 2.0 * v.col(0);
    const DataMatrix d = DataMatrix::continuous({"X", "Y"}, v);
    const OlsFit fit = fit_node(d, "Y", {"X"});
    CHECK(std::abs(fit.coeffs.at(0) - 2.0) < 1e-10);
    CHECK(std::abs(fit.intercept) < 1e-10);
    CHECK(fixture::thrown_kind([&] { node_bic(d, "Y", {"X"}); }) == ErrorKind::degenerate_variance);
}

TEST_CASE("fit_node rejects collinear parents and too few samples") {
    Eigen::MatrixXd v = fixture::gaussian(40, 3, 3);
    v.col(2) = 0.5 * v.col(1);
    const DataMatrix d = DataMatrix::continuous({"Y", "A", "B"}, v);
    CHECK(fixture::thrown_kind([&] { fit_node(d, "Y", {"A", "B"}); }) == ErrorKind::rank_deficient);
    const DataMatrix small = DataMatrix::continuous({"Y", "A", "B"}, fixture::gaussian(4, 3, 4));
    CHECK(fixture::thrown_kind([&] { fit_node(small, "Y", {"A", "B"}); }) == ErrorKind::rank_deficient);
    CHECK_NOTHROW(fit_node(small, "Y", {"A"}));
}

TEST_CASE("fit_node matches the normal-equations oracle on 100 random instances") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(seed % 4);
        Eigen::MatrixXd v = fixture::gaussian(50, p + 1, seed);
        v.col(0) += 0.7 * v.rightCols(p).rowwise().sum();
        std::vector<std::string> names{"Y"};
        std::vector<std::string> parents;
        for (Eigen::Index k = 0; k < p; ++k) {
            names.push_back("P" + std::to_string(k));
            parents.push_back(names.back());
        }
        const DataMatrix d = DataMatrix::continuous(names, v);
        const OlsFit fit = fit_node(d, "Y", parents);
        const oracle::Ols ref = oracle::normal_equations(v.rightCols(p), v.col(0));
        REQUIRE(std::abs(fit.intercept - ref.intercept) < 1e-8);
        for (Eigen::Index k = 0; k < p; ++k)
            REQUIRE(std::abs(fit.coeffs[static_cast<std::size_t>(k)] - ref.coeffs[static_cast<std::size_t>(k)]) < 1e-8);
        REQUIRE(std::abs(fit.noise_sd - std::sqrt(ref.rss / 50.0)) < 1e-8);
        const double loglik = -25.0 * (std::log(2.0 * std::numbers::pi * ref.rss / 50.0) + 1.0);
        REQUIRE(std::abs(fit.loglik - loglik) < 1e-8);
        REQUIRE(std::abs(node_bic(d, "Y", parents) - oracle::gaussian_bic(v.rightCols(p), v.col(0))) < 1e-7);
    }
}

TEST_CASE("each parent adds exactly log(s) to the penalty") {
    CHECK(bic_from_rss(10.0, 100, 3) - bic_from_rss(10.0, 100, 2) == doctest::Approx(std::log(100.0)).epsilon(1e-12));
    CHECK(bic_from_rss(10.0, 100, 1) - bic_from_rss(10.0, 100, 0) == doctest::Approx(std::log(100.0)).epsilon(1e-12));
}

TEST_CASE("a useless parent costs about log(s) on average") {
    double sum = 0.0;
    const int reps = 200;
    for (int seed = 1; seed <= reps; ++seed) {
        const DataMatrix d = DataMatrix::continuous({"Y", "X"}, fixture::gaussian(1000, 2, static_cast<std::uint64_t>(seed)));
        sum += node_bic(d, "Y", {"X"}) - node_bic(d, "Y", {});
    }
    CHECK(std::abs(sum / reps - std::log(1000.0)) < 2.0);
}

TEST_CASE("total BIC decomposes over nodes on random DAGs up to 6 nodes") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const std::size_t n = 2 + seed % 5;
        const Dag dag = random_dag(n, 0.5, seed);
        std::vector<NodeModel> params(n);
        for (std::size_t j = 0; j < n; ++j) params[j].coeffs.assign(dag.parents(j).size(), 0.6);
        GroundTruth truth;
        truth.sem = LinearSem(dag, params);
        const DataMatrix d = sampled(truth, 200, seed);
        const ScoredGraph g = fit_dag(d, dag);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += node_bic(d, j, dag.parents(j));
        CHECK(g.bic_total == doctest::Approx(sum).epsilon(1e-12));
        CHECK(std::abs(g.bic_total - oracle_total_bic(d, dag)) < 1e-6);
        GramScorer scorer(d);
        for (std::size_t j = 0; j < n; ++j)
            CHECK(std::abs(scorer.local_bic(j, dag.parents(j)) - g.node_bic[j]) < 1e-6);
    }
}

TEST_CASE("hill climbing is monotone") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const DataMatrix d = sampled(random_pleiotropic_truth(10, 1, 4, 0.3, seed), 500, seed);
        const ClimbTrace trace = hill_climb_traced(d, {}, {8, 0, seed});
        REQUIRE_FALSE(trace.accepted_scores.empty());
        for (std::size_t k = 1; k < trace.accepted_scores.size(); ++k)
            CHECK(trace.accepted_scores[k] <= trace.accepted_scores[k - 1]);
    }
}

TEST_CASE("hill climbing stops at a local optimum by exhaustive move scan") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const DataMatrix d = sampled(random_pleiotropic_truth(6, 1, 3, 0.4, seed), 400, seed);
        const std::size_t max_in = 3;
        const ScoredGraph g = hill_climb(d, {}, {max_in, 2, seed});
        CHECK(is_local_optimum(d, g.dag, {}, max_in));
        const double current = oracle_total_bic(d, g.dag);
        const std::size_t n = g.dag.size();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) continue;
                std::vector<Dag> moves;
                if (g.dag.has_edge(a, b)) {
                    moves.push_back(g.dag.without_edge(a, b));
                    const Dag removed = g.dag.without_edge(a, b);
                    if (!removed.would_create_cycle(b, a) && removed.parents(a).size() < max_in)
                        moves.push_back(removed.with_edge(b, a));
                } else if (!g.dag.has_edge(b, a) && !g.dag.would_create_cycle(a, b) && g.dag.parents(b).size() < max_in) {
                    moves.push_back(g.dag.with_edge(a, b));
                }
                for (const Dag& m : moves) CHECK(oracle_total_bic(d, m) >= current - 1e-6);
            }
        }
    }
}

TEST_CASE("chain skeleton is recovered") {
    const DataMatrix d = sampled(fixture::chain_truth(), 10000, 5);
    const ScoredGraph g = hill_climb(d, {}, {});
    CHECK(skeleton(g.dag) == Skeleton{{"A", "B"}, {"B", "C"}});
}

TEST_CASE("independent columns give an empty graph") {
    const DataMatrix d = DataMatrix::continuous({"A", "B", "C", "D"}, fixture::gaussian(10000, 4, 6));
    CHECK(hill_climb(d, {}, {}).dag.edge_count() == 0);
}

TEST_CASE("hidden confounders give the benchmark outcome spurious parents") {
    const SimBundle b = confounded_benchmark(2000, 1);
    const ScoredGraph g = hill_climb(b.observed_data, {}, {});
    const auto parents = markov_parents(g.dag, "Z");
    std::size_t extra = 0;
    for (const auto& p : parents) {
        if (p != "V1" && p != "V2") ++extra;
    }
    CHECK(extra >= 1);
    CHECK(g.dag.children(g.dag.index("Z")).empty());
}

TEST_CASE("constraints are honored") {
    const GroundTruth truth = fixture::linear_truth({"A", "B", "C", "Y"}, {{"A", "B"}, {"B", "C"}, {"C", "Y"}, {"A", "Y"}}, 0.8,
                                                    {}, {"Y"});
    const DataMatrix d = sampled(truth, 3000, 8);
    REQUIRE(d.info(d.index("Y")).role == NodeRole::outcome);

    Constraints c;
    c.forced_sources = {"C"};
    c.forbidden = {{"A", "B"}, {"B", "A"}};
    c.required = {{"C", "A"}};
    const ScoredGraph g = hill_climb(d, c, {});
    const Dag& dag = g.dag;
    CHECK(dag.parents(dag.index("C")).empty());
    CHECK_FALSE(dag.has_edge(dag.index("A"), dag.index("B")));
    CHECK_FALSE(dag.has_edge(dag.index("B"), dag.index("A")));
    CHECK(dag.has_edge(dag.index("C"), dag.index("A")));
    CHECK(dag.children(dag.index("Y")).empty());
    CHECK(is_local_optimum(d, dag, c, 8));

    Constraints into_source;
    into_source.forced_sources = {"C"};
    into_source.required = {{"A", "C"}};
    CHECK(fixture::thrown_kind([&] { hill_climb(d, into_source, {}); }) == ErrorKind::invalid_constraints);
    Constraints cyclic;
    cyclic.required = {{"A", "B"}, {"B", "A"}};
    CHECK(fixture::thrown_kind([&] { hill_climb(d, cyclic, {}); }) == ErrorKind::invalid_constraints);
    Constraints out_of_outcome;
    out_of_outcome.required = {{"Y", "A"}};
    CHECK(fixture::thrown_kind([&] { hill_climb(d, out_of_outcome, {}); }) == ErrorKind::invalid_constraints);
    Constraints unknown;
    unknown.forced_sources = {"Q"};
    CHECK(fixture::thrown_kind([&] { hill_climb(d, unknown, {}); }) == ErrorKind::invalid_constraints);
}

TEST_CASE("a single bootstrap replicate is its own consensus") {
    const DataMatrix d = sampled(random_pleiotropic_truth(8, 1, 3, 0.3, 2), 400, 2);
    BootstrapConfig cfg;
    cfg.n_boot = 1;
    cfg.seed = 9;
    std::vector<ScoredGraph> reps;
    const EnsembleGraph e = bootstrap_consensus(d, {}, cfg, &reps);
    REQUIRE(reps.size() == 1);
    CHECK(e.consensus_dag == reps[0].dag);
    for (const auto& edge : e.consensus_dag.edges())
        CHECK(e.averaged_sem.coefficient(edge.from, edge.to) == doctest::Approx(reps[0].sem.coefficient(edge.from, edge.to)));
}

TEST_CASE("bootstrap consensus recovers the chain skeleton") {
    const DataMatrix d = sampled(fixture::chain_truth(), 10000, 12);
    BootstrapConfig cfg;
    cfg.n_boot = 20;
    cfg.threshold = 0.4;
    cfg.seed = 3;
    const EnsembleGraph e = bootstrap_consensus(d, {}, cfg);
    CHECK(skeleton(e.consensus_dag) == Skeleton{{"A", "B"}, {"B", "C"}});
}

TEST_CASE("consensus invariants") {
    const DataMatrix d = sampled(random_pleiotropic_truth(10, 1, 4, 0.3, 4), 150, 4);
    BootstrapConfig cfg;
    cfg.n_boot = 12;
    cfg.seed = 21;
    std::vector<ScoredGraph> reps;

    cfg.threshold = 1.0;
    const EnsembleGraph strict = bootstrap_consensus(d, {}, cfg, &reps);
    for (const auto& r : reps) {
        const Skeleton rs = skeleton(r.dag);
        for (const auto& e : skeleton(strict.consensus_dag)) CHECK(rs.count(e) == 1);
    }

    for (const auto& edge : strict.consensus_dag.edges()) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& r : reps) {
            if (r.dag.has_edge(edge.from, edge.to)) {
                sum += r.sem.coefficient(edge.from, edge.to);
                ++count;
            }
        }
        REQUIRE(count > 0);
        CHECK(strict.averaged_sem.coefficient(edge.from, edge.to) == doctest::Approx(sum / static_cast<double>(count)));
    }

    Skeleton previous;
    bool first = true;
    for (double t : {0.9, 0.7, 0.5, 0.3, 0.1}) {
        cfg.threshold = t;
        const EnsembleGraph e = bootstrap_consensus(d, {}, cfg);
        for (const auto& edge : e.consensus_dag.edges())
            CHECK(e.combined_frequency(edge.from, edge.to) >= t - 1e-12);
        const Skeleton s = skeleton(e.consensus_dag);
        if (!first) {
            for (const auto& edge : previous) CHECK(s.count(edge) == 1);
        }
        previous = s;
        first = false;
    }
}

TEST_CASE("bootstrap results do not depend on the thread count") {
    const DataMatrix d = sampled(random_pleiotropic_truth(10, 1, 4, 0.3, 6), 300, 6);
    BootstrapConfig cfg;
    cfg.n_boot = 8;
    cfg.seed = 5;
    const EnsembleGraph one = bootstrap_consensus(d, {}, cfg);
    cfg.threads = 3;
    const EnsembleGraph three = bootstrap_consensus(d, {}, cfg);
    CHECK(one.edge_frequency == three.edge_frequency);
    CHECK(one.consensus_dag == three.consensus_dag);
    CHECK(one.averaged_sem.coefficient_matrix() == three.averaged_sem.coefficient_matrix());
}

TEST_CASE("bootstrap configuration is validated") {
    const DataMatrix d = sampled(fixture::chain_truth(), 100, 1);
    BootstrapConfig cfg;
    cfg.n_boot = 0;
    CHECK(fixture::thrown_kind([&] { bootstrap_consensus(d, {}, cfg); }) == ErrorKind::invalid_config);
    cfg.n_boot = 2;
    cfg.threshold = 0.0;
    CHECK(fixture::thrown_kind([&] { bootstrap_consensus(d, {}, cfg); }) == ErrorKind::invalid_config);
    cfg.threshold = 1.5;
    CHECK(fixture::thrown_kind([&] { bootstrap_consensus(d, {}, cfg); }) == ErrorKind::invalid_config);
}

}  // TEST_SUITE
