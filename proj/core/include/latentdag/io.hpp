#ifndef LATENTDAG_IO_HPP
#define LATENTDAG_IO_HPP

#include <latentdag/data.hpp>
#include <latentdag/latent_pca.hpp>
#include <latentdag/search.hpp>
#include <latentdag/simulate.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace latentdag {

/// Header plus numeric body of a CSV file.
struct Table {
    std::vector<std::string> names;
    Eigen::MatrixXd values;
};

/// Headered, comma-separated, '.' decimal. Throws IoFailure and ParseError (with line number).
Table read_csv(const std::filesystem::path& path);
Table parse_csv(const std::string& text);

/// Values are written with 17 significant digits so a round trip is exact.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
               const Eigen::MatrixXd& values);
void write_csv(const std::filesystem::path& path, const DataMatrix& data);
void write_csv(const std::filesystem::path& path, const ResidualMatrix& residuals);
std::string format_double(double value);

/// Roles sidecar: {"outcomes": [...], "ordinal": {name: levels}, "forbidden": [[a, b]],
/// "required": [[a, b]], "forced_sources": [...]}. Every key is optional; other keys
/// are ignored, so a truth.json can serve as a roles file.
struct RolesSpec {
    std::vector<std::string> outcomes;
    std::map<std::string, int> ordinal;
    Constraints constraints;
};

RolesSpec read_roles(const std::filesystem::path& path);
RolesSpec parse_roles(const std::string& text);

/// Throws InvalidRoles when the spec names a column the table lacks or an ordinal
/// declaration has fewer than 2 levels.
DataMatrix apply_roles(const Table& table, const RolesSpec& roles);

void write_truth(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth read_truth(const std::filesystem::path& path);
std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const std::string& text);

/// observed.csv, full.csv and truth.json.
void write_bundle(const std::filesystem::path& dir, const SimBundle& bundle);

struct GraphEdgeRecord {
    std::string from;
    std::string to;
    double coeff = 0.0;
    double frequency = 1.0;
};

/// Serializable graph: {nodes: [{name, role}], edges: [{from, to, coeff, frequency}]}.
struct GraphDocument {
    std::vector<std::string> nodes;
    std::vector<NodeRole> roles;
    std::vector<GraphEdgeRecord> edges;

    Dag dag() const;
    /// Coefficients only; intercepts are 0 and noise sds 1.
    LinearSem sem() const;
};

/// Consensus edges with averaged coefficients and combined bootstrap frequency.
GraphDocument graph_document(const EnsembleGraph& ensemble);
GraphDocument graph_document(const LinearSem& sem);

std::string graph_to_json(const GraphDocument& graph);
GraphDocument graph_from_json(const std::string& text);
void write_graph_json(const std::filesystem::path& path, const GraphDocument& graph);
/// Throws MissingArtifact when the file is absent and ParseError when it is malformed.
GraphDocument read_graph_json(const std::filesystem::path& path);

/// Graphviz rendering: node fill by role, edge label = coefficient, penwidth grows
/// with frequency. With a truth, edges into an outcome from its true parents are red.
std::string graph_to_dot(const GraphDocument& graph, const GroundTruth* truth = nullptr);
void write_dot(const std::filesystem::path& path, const GraphDocument& graph, const GroundTruth* truth = nullptr);

/// Latent scores as Ū1..Ūq columns.
void write_latent_scores(const std::filesystem::path& path, const LatentEstimate& latents);
/// One row per residual column: variable,Ū1,..,Ūq.
void write_latent_loadings(const std::filesystem::path& path, const LatentEstimate& latents);
/// {"eigenvalues": [...], "ceiling_q": c, "q": q}.
void write_eigen_report(const std::filesystem::path& path, const LatentEstimate& latents);

/// Bootstrap edge frequencies: from,to,frequency (directed, sorted).
void write_edge_frequencies(const std::filesystem::path& path, const EnsembleGraph& ensemble,
                            const std::vector<std::string>& names);
/// Local models: node,parent,coefficient rows; the intercept uses parent "(intercept)".
void write_coefficients(const std::filesystem::path& path, const LinearSem& sem);

void write_text(const std::filesystem::path& path, const std::string& text);
/// Throws MissingArtifact when absent.
std::string read_text(const std::filesystem::path& path);
/// FNV-1a over the file bytes, as 16 hex digits.
std::string content_hash(const std::filesystem::path& path);

}  // namespace latentdag

#endif  // LATENTDAG_IO_HPP
