#include "fixtures.hpp"

#include <latentdag/error.hpp>
#include <latentdag/io.hpp>
#include <latentdag/random.hpp>
#include <latentdag/simulate.hpp>

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

using namespace latentdag;

namespace {

std::string error_message(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("CSV round trip is exact") {
    const auto dir = fixture::scratch_dir("io-roundtrip");
    Eigen::MatrixXd v = fixture::gaussian(30, 4, 1) * 1e3;
    v(0, 0) = std::numeric_limits<double>::denorm_min();
    v(1, 1) = -0.0;
    v(2, 2) = 1.0 / 3.0;
    v(3, 3) = std::numeric_limits<double>::max();
    write_csv(dir / "a.csv", {"x", "y,z", "w", "Ū1"}, v);
    const Table t = read_csv(dir / "a.csv");
    CHECK(t.names == std::vector<std::string>{"x", "y,z", "w", "Ū1"});
    CHECK(t.values == v);
}

TEST_CASE("CSV parse errors name the line") {
    const std::string msg = error_message([] { parse_csv("a,b\n1,2\n3,x\n"); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
    CHECK(fixture::thrown_kind([] { parse_csv("a,b\n1,2\n3\n"); }) == ErrorKind::parse_error);
    CHECK(fixture::thrown_kind([] { parse_csv("a,a\n1,2\n"); }) == ErrorKind::parse_error);
    CHECK(fixture::thrown_kind([] { parse_csv("a,b\n1,nan\n"); }) == ErrorKind::parse_error);
    CHECK(fixture::thrown_kind([] { parse_csv(""); }) == ErrorKind::parse_error);
    CHECK(fixture::thrown_kind([] { read_csv("/nonexistent/latentdag/file.csv"); }) == ErrorKind::io_failure);
}

TEST_CASE("CSV parsing tolerates a BOM, CRLF and blank lines") {
    const Table t = parse_csv("\xEF\xBB\xBF" "a, b\r\n1.5,-2e3\r\n\r\n4,5\r\n");
    CHECK(t.names == std::vector<std::string>{"a", "b"});
    REQUIRE(t.values.rows() == 2);
    CHECK(t.values(0, 1) == -2000.0);
    CHECK(t.values(1, 0) == 4.0);
}

TEST_CASE("roles are parsed and applied") {
    const RolesSpec spec = parse_roles(
        R"({"outcomes": ["Y"], "ordinal": {"O": 3}, "forbidden": [["A", "Y"]], "required": [["A", "O"]],
            "forced_sources": ["A"], "comment": "ignored"})");
    CHECK(spec.outcomes == std::vector<std::string>{"Y"});
    CHECK(spec.ordinal.at("O") == 3);
    CHECK(spec.constraints.forbidden == std::vector<NamedEdge>{{"A", "Y"}});
    CHECK(spec.constraints.required == std::vector<NamedEdge>{{"A", "O"}});
    CHECK(spec.constraints.forced_sources == std::vector<std::string>{"A"});

    const Table t = parse_csv("A,O,Y\n0.5,0,1\n1.5,2,2\n-1,1,3\n");
    const DataMatrix d = apply_roles(t, spec);
    CHECK(d.info(d.index("Y")).role == NodeRole::outcome);
    CHECK(d.info(d.index("O")).kind == VariableKind::ordinal);
    CHECK(d.info(d.index("O")).levels == 3);

    CHECK(fixture::thrown_kind([&] { apply_roles(t, parse_roles(R"({"outcomes": ["Q"]})")); }) ==
          ErrorKind::invalid_roles);
    CHECK(fixture::thrown_kind([&] { apply_roles(t, parse_roles(R"({"ordinal": {"O": 1}})")); }) ==
          ErrorKind::invalid_roles);
    CHECK(fixture::thrown_kind([] { parse_roles("{not json"); }) == ErrorKind::parse_error);
    CHECK(fixture::thrown_kind([] { parse_roles(R"({"forbidden": [["A"]]})"); }) == ErrorKind::parse_error);
}

TEST_CASE("truth round trip") {
    const GroundTruth t = random_pleiotropic_truth(8, 2, 3, 0.3, 5);
    const GroundTruth with_outcome = confounded_benchmark_truth(4);
    for (const GroundTruth* truth : {&t, &with_outcome}) {
        const GroundTruth back = truth_from_json(truth_to_json(*truth));
        CHECK(back.sem.dag() == truth->sem.dag());
        CHECK(back.sem.coefficient_matrix() == truth->sem.coefficient_matrix());
        CHECK(back.latent_names == truth->latent_names);
        CHECK(back.outcome_names == truth->outcome_names);
        for (std::size_t i = 0; i < truth->sem.dag().size(); ++i) {
            CHECK(back.sem.params(i).intercept == truth->sem.params(i).intercept);
            CHECK(back.sem.params(i).noise_sd == truth->sem.params(i).noise_sd);
        }
    }
    CHECK(fixture::thrown_kind([] { truth_from_json(R"({"nodes": [], "edges": [{"from": "A", "to": "B"}]})"); }) ==
          ErrorKind::parse_error);
}

TEST_CASE("bundle writes observed, full and truth") {
    const auto dir = fixture::scratch_dir("io-bundle");
    const SimBundle b = confounded_benchmark(20, 3, 4);
    write_bundle(dir, b);
    CHECK(read_csv(dir / "observed.csv").values == b.observed_data.values());
    CHECK(read_csv(dir / "full.csv").names == b.full_data.names());
    CHECK(read_truth(dir / "truth.json").sem.dag() == b.truth.sem.dag());
}

TEST_CASE("graph document round trip") {
    const GroundTruth t = confounded_benchmark_truth(3);
    const GraphDocument doc = graph_document(t.sem);
    const GraphDocument back = graph_from_json(graph_to_json(doc));
    CHECK(back.nodes == doc.nodes);
    CHECK(back.roles == doc.roles);
    CHECK(back.dag() == t.sem.dag());
    CHECK(back.sem().coefficient_matrix() == t.sem.coefficient_matrix());
    REQUIRE(back.edges.size() == doc.edges.size());
    for (std::size_t k = 0; k < doc.edges.size(); ++k) CHECK(back.edges[k].frequency == doc.edges[k].frequency);
}

TEST_CASE("corrupt and missing graph files are reported") {
    const auto dir = fixture::scratch_dir("io-graph");
    write_text(dir / "graph.json", "{\"nodes\": [");
    CHECK(fixture::thrown_kind([&] { read_graph_json(dir / "graph.json"); }) == ErrorKind::parse_error);
    write_text(dir / "graph.json", R"({"nodes": [{"name": "A", "role": "predictor"}], "edges": [{"from": "A", "to": "B", "coeff": 1, "frequency": 1}]})");
    CHECK(fixture::thrown_kind([&] { read_graph_json(dir / "graph.json"); }) == ErrorKind::parse_error);
    CHECK(fixture::thrown_kind([&] { read_graph_json(dir / "absent.json"); }) == ErrorKind::missing_artifact);
}

TEST_CASE("DOT rendering encodes roles, coefficients and frequencies") {
    GraphDocument doc;
    doc.nodes = {"V1", "Z", "Ū1"};
    doc.roles = {NodeRole::predictor, NodeRole::outcome, NodeRole::latent_estimate};
    doc.edges = {{"V1", "Z", 0.75, 1.0}, {"Ū1", "Z", -1.25, 0.5}};
    const std::string plain = graph_to_dot(doc);
    CHECK(plain.find("\"Z\" [fillcolor=gold") != std::string::npos);
    CHECK(plain.find("\"Ū1\" [fillcolor=lightblue, shape=diamond") != std::string::npos);
    CHECK(plain.find("label=\"0.750\", penwidth=4.00") != std::string::npos);
    CHECK(plain.find("label=\"-1.250\", penwidth=2.25") != std::string::npos);
    CHECK(plain.find("color=red") == std::string::npos);

    const GroundTruth truth = fixture::linear_truth({"V1", "Z"}, {{"V1", "Z"}}, 1.0, {}, {"Z"});
    const std::string marked = graph_to_dot(doc, &truth);
    CHECK(marked.find("\"V1\" -> \"Z\" [label=\"0.750\", penwidth=4.00, color=red]") != std::string::npos);
    CHECK(marked.find("\"Ū1\" -> \"Z\" [label=\"-1.250\", penwidth=2.25];") != std::string::npos);
}

TEST_CASE("latent and coefficient artifacts") {
    const auto dir = fixture::scratch_dir("io-latents");
    LatentEstimate e;
    e.q = 2;
    e.ceiling_q = 3;
    e.scores = fixture::gaussian(5, 2, 1);
    e.loadings = fixture::gaussian(3, 2, 2);
    e.all_eigenvalues = Eigen::Vector3d(2.0, 1.0, 0.5);
    e.input_names = {"A", "B", "C"};
    write_latent_scores(dir / "latents.csv", e);
    write_latent_loadings(dir / "loadings.csv", e);
    write_eigen_report(dir / "eigen.json", e);
    const Table scores = read_csv(dir / "latents.csv");
    CHECK(scores.names == std::vector<std::string>{"Ū1", "Ū2"});
    CHECK(scores.values == e.scores);
    CHECK(read_text(dir / "loadings.csv").starts_with("variable,Ū1,Ū2\nA,"));
    const std::string eigen = read_text(dir / "eigen.json");
    CHECK(eigen.find("\"ceiling_q\": 3") != std::string::npos);
    CHECK(eigen.find("\"q\": 2") != std::string::npos);

    const GroundTruth t = fixture::chain_truth();
    write_coefficients(dir / "coefficients.csv", t.sem);
    const std::string coeffs = read_text(dir / "coefficients.csv");
    CHECK(coeffs.starts_with("node,parent,coefficient\nA,(intercept),0\n"));
    CHECK(coeffs.find("B,A,0.80000000000000004\n") != std::string::npos);
}

TEST_CASE("content hash tracks file bytes") {
    const auto dir = fixture::scratch_dir("io-hash");
    write_text(dir / "a.txt", "hello");
    write_text(dir / "b.txt", "hello");
    write_text(dir / "c.txt", "hellp");
    CHECK(content_hash(dir / "a.txt") == content_hash(dir / "b.txt"));
    CHECK(content_hash(dir / "a.txt") != content_hash(dir / "c.txt"));
    CHECK(content_hash(dir / "a.txt").size() == 16);
    CHECK(fixture::thrown_kind([&] { read_text(dir / "missing.txt"); }) == ErrorKind::missing_artifact);
}

}  // TEST_SUITE
