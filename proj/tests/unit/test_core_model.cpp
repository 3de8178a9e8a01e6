#include "fixtures.hpp"
#include "oracles.hpp"

#include <latentdag/dag.hpp>
#include <latentdag/data.hpp>
#include <latentdag/error.hpp>
#include <latentdag/sem.hpp>

#include <doctest.h>

#include <algorithm>

using namespace latentdag;

namespace {

Dag chain() { return Dag::from_named_edges({"A", "B", "C"}, {}, {{"A", "B"}, {"B", "C"}}); }

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::invalid_config;
}

}  // namespace

TEST_SUITE("core_model") {

TEST_CASE("topological order of an edgeless graph is a permutation") {
    const Dag dag({"A", "B", "C"});
    auto order = topological_order(dag);
    std::sort(order.begin(), order.end());
    CHECK(order == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("topological order of a chain is unique") {
    CHECK(topological_order(chain()) == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("a two-cycle is rejected and the cycle is named") {
    const std::vector<std::string> names{"A", "B"};
    const std::vector<Edge> edges{{0, 1}, {1, 0}};
    try {
        topological_order(names, edges);
        FAIL("expected a cycle");
    } catch (const CycleError& e) {
        CHECK(e.kind() == ErrorKind::cycle_detected);
        auto cycle = e.cycle();
        std::sort(cycle.begin(), cycle.end());
        CHECK(cycle == names);
    }
    CHECK_THROWS_AS(Dag(names, {}, edges), CycleError);
}

TEST_CASE("markov parents") {
    CHECK(markov_parents(chain(), "B") == std::vector<std::string>{"A"});
    const Dag collider = Dag::from_named_edges({"A", "B", "C"}, {}, {{"A", "C"}, {"B", "C"}});
    CHECK(markov_parents(collider, "C") == std::vector<std::string>{"A", "B"});
    const Dag isolated({"A", "B"});
    CHECK(markov_parents(isolated, "A").empty());
    CHECK(kind_of([&] { markov_parents(isolated, "Q"); }) == ErrorKind::unknown_node);
}

TEST_CASE("would_create_cycle examples") {
    CHECK(would_create_cycle(chain(), "C", "A"));
    CHECK_FALSE(would_create_cycle(chain(), "A", "C"));
    CHECK_FALSE(would_create_cycle(Dag({"A", "B"}), "A", "B"));
    CHECK(kind_of([&] { would_create_cycle(chain(), "A", "Q"); }) == ErrorKind::unknown_node);
}

TEST_CASE("would_create_cycle agrees with insert-then-sort on every DAG up to 4 nodes") {
    for (std::size_t n = 1; n <= 4; ++n) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a != b) pairs.emplace_back(a, b);
            }
        }
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('A' + i)));
        std::size_t graphs = 0;
        for (std::uint32_t mask = 0; mask < (1u << pairs.size()); ++mask) {
            std::vector<std::pair<std::size_t, std::size_t>> edges;
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                if (mask & (1u << k)) edges.push_back(pairs[k]);
            }
            if (!oracle::is_acyclic(n, edges)) continue;
            ++graphs;
            std::vector<Edge> list;
            for (const auto& [a, b] : edges) list.push_back({a, b});
            const Dag dag(names, {}, list);
            CHECK_NOTHROW(dag.topological_order());
            for (const auto& [a, b] : pairs) {
                if (dag.has_edge(a, b)) continue;
                auto extended = edges;
                extended.emplace_back(a, b);
                const bool sortable = oracle::is_acyclic(n, extended);
                REQUIRE(dag.would_create_cycle(a, b) == !sortable);
                REQUIRE(dag.would_create_cycle(a, b) == oracle::reaches(n, edges, b, a));
            }
        }
        if (n == 4) CHECK(graphs == 543);
    }
}

TEST_CASE("dag construction enforces invariants") {
    CHECK(kind_of([] { Dag({"A"}, {}, {{0, 0}}); }) == ErrorKind::cycle_detected);
    CHECK(kind_of([] { Dag({"A", "B"}, {}, {{0, 1}, {0, 1}}); }) == ErrorKind::invalid_config);
    CHECK(kind_of([] { Dag({"A", "B"}, {NodeRole::outcome, NodeRole::predictor}, {{0, 1}}); }) ==
          ErrorKind::invalid_constraints);
    CHECK(kind_of([] { Dag({"A", "A"}); }) == ErrorKind::name_collision);
    const Dag d = chain();
    CHECK(d.with_edge(0, 2).edge_count() == 3);
    CHECK(d.without_edge(0, 1).edge_count() == 1);
    CHECK(d.with_edge(0, 2) == Dag::from_named_edges({"A", "B", "C"}, {}, {{"A", "B"}, {"B", "C"}, {"A", "C"}}));
}

TEST_CASE("linear sem validates parameters against the graph") {
    const Dag d = chain();
    CHECK(kind_of([&] { LinearSem(d, std::vector<NodeModel>(2)); }) == ErrorKind::shape_mismatch);
    std::vector<NodeModel> params(3);
    CHECK(kind_of([&] { LinearSem(d, params); }) == ErrorKind::shape_mismatch);
    params[1].coeffs = {0.5};
    params[2].coeffs = {-2.0};
    params[2].noise_sd = 0.0;
    CHECK(kind_of([&] { LinearSem(d, params); }) == ErrorKind::invalid_config);
    params[2].noise_sd = 1.5;
    const LinearSem sem(d, params);
    CHECK(sem.coefficient("A", "B") == 0.5);
    CHECK(sem.coefficient("C", "B") == 0.0);
    CHECK(sem.coefficient_matrix()(2, 1) == -2.0);
}

TEST_CASE("implied covariance matches the recursive oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const GroundTruth truth = random_pleiotropic_truth(8, 2, 3, 0.3, seed);
        const Eigen::MatrixXd closed = truth.sem.implied_covariance();
        const Eigen::MatrixXd recursive = oracle::recursive_implied_covariance(truth.sem);
        CHECK((closed - recursive).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("data matrix rejects invalid ordinal codes and duplicate names") {
    Eigen::MatrixXd v(3, 2);
    v << 0, 1.5, 1, 2.5, 2, 3.5;
    std::vector<ColumnInfo> cols{{"O", VariableKind::ordinal, 3, NodeRole::predictor}, {"X"}};
    CHECK_NOTHROW(DataMatrix(cols, v));
    cols[0].levels = 2;
    CHECK(kind_of([&] { DataMatrix(cols, v); }) == ErrorKind::parse_error);
    cols[0].levels = 3;
    v(0, 0) = 0.5;
    CHECK(kind_of([&] { DataMatrix(cols, v); }) == ErrorKind::parse_error);
    CHECK(kind_of([&] { DataMatrix::continuous({"A", "A"}, Eigen::MatrixXd::Zero(2, 2)); }) ==
          ErrorKind::name_collision);
}

TEST_CASE("data matrix selection preserves values") {
    const DataMatrix d = DataMatrix::continuous({"A", "B", "C"}, fixture::gaussian(10, 3, 4));
    const DataMatrix w = d.without({"B"});
    CHECK(w.names() == std::vector<std::string>{"A", "C"});
    CHECK(w.column("C") == d.column("C"));
    CHECK(d.select({"C", "A"}).column(0) == d.column(2));
    CHECK(d.take_rows({2, 2}).rows() == 2);
    CHECK(d.with_roles({{"C", NodeRole::outcome}}).info(2).role == NodeRole::outcome);
}

TEST_CASE("residual matrix mirrors names") {
    const ResidualMatrix r({"A", "B"}, Eigen::MatrixXd::Ones(4, 2), {NodeRole::predictor, NodeRole::outcome});
    CHECK(r.without_role(NodeRole::outcome).names() == std::vector<std::string>{"A"});
    CHECK(kind_of([&] { r.select({"Q"}); }) == ErrorKind::unknown_node);
    CHECK(kind_of([] { ResidualMatrix({"A"}, Eigen::MatrixXd::Ones(4, 2)); }) == ErrorKind::shape_mismatch);
}

}  // TEST_SUITE
