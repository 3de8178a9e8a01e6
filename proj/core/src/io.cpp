#include <latentdag/error.hpp>
#include <latentdag/io.hpp>
#include <latentdag/random.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace latentdag {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"' && trim(field).empty()) {
            field.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            out.push_back(was_quoted ? field : trim(field));
            field.clear();
            was_quoted = false;
        } else if (!(was_quoted && (c == ' ' || c == '\t' || c == '\r'))) {
            field += c;
        }
    }
    out.push_back(was_quoted ? field : trim(field));
    return out;
}

std::string csv_name(const std::string& name) {
    if (name.find_first_of(",\"\n") == std::string::npos) return name;
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorKind::io_failure, "cannot create directory '" + path.parent_path().string() + "'");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io_failure, "cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw Error(ErrorKind::io_failure, "failed writing '" + path.string() + "'");
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, what + ": " + e.what());
    }
}

std::vector<NamedEdge> edge_pairs(const json& j, const char* key) {
    std::vector<NamedEdge> out;
    if (!j.contains(key)) return out;
    for (const auto& e : j.at(key)) {
        if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::parse_error, std::string("'") + key + "' entries must be [from, to]");
        out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return out;
}

void write_json_file(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

Table parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    Table table;
    std::vector<std::vector<double>> rows;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (!header) {
            for (const auto& f : fields) {
                if (f.empty()) throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": empty column name");
            }
            table.names = std::move(fields);
            if (std::set<std::string>(table.names.begin(), table.names.end()).size() != table.names.size())
                throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": duplicate column name");
            header = true;
            continue;
        }
        if (fields.size() != table.names.size())
            throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(table.names.size()) + " fields, found " +
                                                    std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const auto& f = fields[j];
            const char* end = f.data() + f.size();
            auto [ptr, ec] = std::from_chars(f.data(), end, row[j]);
            if (f.empty() || ec != std::errc() || ptr != end || !std::isfinite(row[j]))
                throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ", column '" + table.names[j] +
                                                        "': cannot parse '" + f + "' as a finite number");
        }
        rows.push_back(std::move(row));
    }
    if (!header) throw Error(ErrorKind::parse_error, "CSV has no header line");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return table;
}

Table read_csv(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorKind::io_failure, "cannot open '" + path.string() + "'");
    try {
        return parse_csv(read_text(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse_error) throw Error(ErrorKind::parse_error, path.string() + ": " + e.message());
        throw;
    }
}

void write_csv(const fs::path& path, const std::vector<std::string>& names, const Eigen::MatrixXd& values) {
    if (static_cast<Eigen::Index>(names.size()) != values.cols())
        throw Error(ErrorKind::shape_mismatch, "column names and values differ in width");
    auto out = open_out(path);
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << csv_name(names[j]);
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
        out << '\n';
    }
    finish(out, path);
}

void write_csv(const fs::path& path, const DataMatrix& data) { write_csv(path, data.names(), data.values()); }

void write_csv(const fs::path& path, const ResidualMatrix& residuals) {
    write_csv(path, residuals.names(), residuals.values());
}

RolesSpec parse_roles(const std::string& text) {
    const json j = parse_json(text, "roles file");
    if (!j.is_object()) throw Error(ErrorKind::parse_error, "roles file must hold a JSON object");
    RolesSpec spec;
    try {
        if (j.contains("outcomes")) spec.outcomes = j.at("outcomes").get<std::vector<std::string>>();
        if (j.contains("ordinal")) {
            for (const auto& [name, levels] : j.at("ordinal").items()) spec.ordinal[name] = levels.get<int>();
        }
        spec.constraints.forbidden = edge_pairs(j, "forbidden");
        spec.constraints.required = edge_pairs(j, "required");
        if (j.contains("forced_sources"))
            spec.constraints.forced_sources = j.at("forced_sources").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("roles file: ") + e.what());
    }
    return spec;
}

RolesSpec read_roles(const fs::path& path) { return parse_roles(read_text(path)); }

DataMatrix apply_roles(const Table& table, const RolesSpec& roles) {
    const std::set<std::string> names(table.names.begin(), table.names.end());
    auto require = [&](const std::string& n, const char* what) {
        if (!names.count(n)) throw Error(ErrorKind::invalid_roles, std::string(what) + " '" + n + "' is not a column");
    };
    for (const auto& o : roles.outcomes) require(o, "outcome");
    for (const auto& [n, levels] : roles.ordinal) {
        require(n, "ordinal variable");
        if (levels < 2) throw Error(ErrorKind::invalid_roles, "ordinal variable '" + n + "' needs at least 2 levels");
    }
    for (const auto& [a, b] : roles.constraints.forbidden) {
        require(a, "constraint endpoint");
        require(b, "constraint endpoint");
    }
    for (const auto& [a, b] : roles.constraints.required) {
        require(a, "constraint endpoint");
        require(b, "constraint endpoint");
    }
    for (const auto& n : roles.constraints.forced_sources) require(n, "forced source");

    std::vector<ColumnInfo> cols;
    for (const auto& n : table.names) {
        ColumnInfo c;
        c.name = n;
        if (std::find(roles.outcomes.begin(), roles.outcomes.end(), n) != roles.outcomes.end()) c.role = NodeRole::outcome;
        if (auto it = roles.ordinal.find(n); it != roles.ordinal.end()) {
            c.kind = VariableKind::ordinal;
            c.levels = it->second;
        }
        cols.push_back(std::move(c));
    }
    try {
        return DataMatrix(std::move(cols), table.values);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::kind_mismatch) throw Error(ErrorKind::invalid_roles, e.message());
        throw;
    }
}

std::string truth_to_json(const GroundTruth& truth) {
    const Dag& dag = truth.sem.dag();
    ojson j;
    j["latents"] = truth.latent_names;
    j["outcomes"] = truth.outcome_names;
    ojson nodes = ojson::array();
    for (std::size_t i = 0; i < dag.size(); ++i) {
        const auto& p = truth.sem.params(i);
        nodes.push_back({{"name", dag.name(i)}, {"intercept", p.intercept}, {"noise_sd", p.noise_sd}});
    }
    j["nodes"] = nodes;
    ojson edges = ojson::array();
    for (const auto& e : dag.edges()) {
        edges.push_back({{"from", dag.name(e.from)}, {"to", dag.name(e.to)}, {"coeff", truth.sem.coefficient(e.from, e.to)}});
    }
    j["edges"] = edges;
    return j.dump(2) + "\n";
}

GroundTruth truth_from_json(const std::string& text) {
    const json j = parse_json(text, "truth file");
    try {
        GroundTruth truth;
        truth.latent_names = j.at("latents").get<std::vector<std::string>>();
        truth.outcome_names = j.at("outcomes").get<std::vector<std::string>>();
        std::vector<std::string> names;
        std::vector<NodeModel> params;
        std::unordered_map<std::string, std::size_t> index;
        for (const auto& n : j.at("nodes")) {
            index[n.at("name").get<std::string>()] = names.size();
            names.push_back(n.at("name").get<std::string>());
            NodeModel m;
            m.intercept = n.at("intercept").get<double>();
            m.noise_sd = n.at("noise_sd").get<double>();
            params.push_back(m);
        }
        std::vector<NodeRole> roles(names.size(), NodeRole::predictor);
        for (const auto& o : truth.outcome_names) {
            if (!index.count(o)) throw Error(ErrorKind::parse_error, "truth outcome '" + o + "' is not a node");
            roles[index[o]] = NodeRole::outcome;
        }
        for (const auto& l : truth.latent_names) {
            if (!index.count(l)) throw Error(ErrorKind::parse_error, "truth latent '" + l + "' is not a node");
        }
        std::vector<Edge> edges;
        std::map<Edge, double> coeff;
        for (const auto& e : j.at("edges")) {
            const auto from = e.at("from").get<std::string>();
            const auto to = e.at("to").get<std::string>();
            if (!index.count(from) || !index.count(to))
                throw Error(ErrorKind::parse_error, "truth edge " + from + " -> " + to + " names an unknown node");
            Edge edge{index[from], index[to]};
            edges.push_back(edge);
            coeff[edge] = e.at("coeff").get<double>();
        }
        Dag dag(names, roles, edges);
        for (std::size_t i = 0; i < names.size(); ++i) {
            for (std::size_t p : dag.parents(i)) params[i].coeffs.push_back(coeff.at(Edge{p, i}));
        }
        truth.sem = LinearSem(std::move(dag), std::move(params));
        return truth;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("truth file: ") + e.what());
    }
}

void write_truth(const fs::path& path, const GroundTruth& truth) { write_text(path, truth_to_json(truth)); }

GroundTruth read_truth(const fs::path& path) { return truth_from_json(read_text(path)); }

void write_bundle(const fs::path& dir, const SimBundle& bundle) {
    write_csv(dir / "observed.csv", bundle.observed_data);
    write_csv(dir / "full.csv", bundle.full_data);
    write_truth(dir / "truth.json", bundle.truth);
}

Dag GraphDocument::dag() const {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = i;
    std::vector<Edge> list;
    for (const auto& e : edges) {
        if (!index.count(e.from) || !index.count(e.to))
            throw Error(ErrorKind::parse_error, "graph edge " + e.from + " -> " + e.to + " names an unknown node");
        list.push_back({index[e.from], index[e.to]});
    }
    return Dag(nodes, roles, list);
}

LinearSem GraphDocument::sem() const {
    Dag d = dag();
    std::map<std::pair<std::string, std::string>, double> coeff;
    for (const auto& e : edges) coeff[{e.from, e.to}] = e.coeff;
    std::vector<NodeModel> params(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t p : d.parents(i)) params[i].coeffs.push_back(coeff.at({d.name(p), d.name(i)}));
    }
    return LinearSem(std::move(d), std::move(params));
}

GraphDocument graph_document(const LinearSem& sem) {
    const Dag& dag = sem.dag();
    GraphDocument doc;
    doc.nodes = dag.nodes();
    doc.roles = dag.roles();
    for (const auto& e : dag.edges())
        doc.edges.push_back({dag.name(e.from), dag.name(e.to), sem.coefficient(e.from, e.to), 1.0});
    return doc;
}

GraphDocument graph_document(const EnsembleGraph& ensemble) {
    GraphDocument doc = graph_document(ensemble.averaged_sem);
    const Dag& dag = ensemble.averaged_sem.dag();
    for (auto& e : doc.edges) e.frequency = ensemble.combined_frequency(dag.index(e.from), dag.index(e.to));
    return doc;
}

std::string graph_to_json(const GraphDocument& graph) {
    ojson j;
    ojson nodes = ojson::array();
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const NodeRole role = i < graph.roles.size() ? graph.roles[i] : NodeRole::predictor;
        nodes.push_back({{"name", graph.nodes[i]}, {"role", std::string(to_string(role))}});
    }
    j["nodes"] = nodes;
    ojson edges = ojson::array();
    for (const auto& e : graph.edges)
        edges.push_back({{"from", e.from}, {"to", e.to}, {"coeff", e.coeff}, {"frequency", e.frequency}});
    j["edges"] = edges;
    return j.dump(2) + "\n";
}

GraphDocument graph_from_json(const std::string& text) {
    const json j = parse_json(text, "graph file");
    GraphDocument doc;
    try {
        for (const auto& n : j.at("nodes")) {
            doc.nodes.push_back(n.at("name").get<std::string>());
            doc.roles.push_back(parse_role(n.at("role").get<std::string>()));
        }
        for (const auto& e : j.at("edges")) {
            doc.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                                 e.at("coeff").get<double>(), e.at("frequency").get<double>()});
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("graph file: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::parse_error, std::string("graph file: ") + e.message());
    }
    try {
        doc.dag();
    } catch (const Error& e) {
        throw Error(ErrorKind::parse_error, std::string("graph file: ") + e.message());
    }
    return doc;
}

void write_graph_json(const fs::path& path, const GraphDocument& graph) { write_text(path, graph_to_json(graph)); }

GraphDocument read_graph_json(const fs::path& path) {
    try {
        return graph_from_json(read_text(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse_error) throw Error(ErrorKind::parse_error, path.string() + ": " + e.message());
        throw;
    }
}

std::string graph_to_dot(const GraphDocument& graph, const GroundTruth* truth) {
    std::set<std::pair<std::string, std::string>> driver_edges;
    if (truth) {
        const Dag& t = truth->sem.dag();
        for (const auto& o : truth->outcome_names) {
            const auto oi = t.find(o);
            if (!oi) continue;
            for (std::size_t p : t.parents(*oi)) driver_edges.insert({t.name(p), o});
        }
    }
    auto quote = [](const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out + "\"";
    };
    std::ostringstream out;
    out << "digraph G {\n  node [style=filled, fontname=\"Helvetica\"];\n";
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const NodeRole role = i < graph.roles.size() ? graph.roles[i] : NodeRole::predictor;
        const char* fill = role == NodeRole::outcome ? "gold" : role == NodeRole::latent_estimate ? "lightblue" : "white";
        const char* shape = role == NodeRole::latent_estimate ? "diamond" : "ellipse";
        out << "  " << quote(graph.nodes[i]) << " [fillcolor=" << fill << ", shape=" << shape << "];\n";
    }
    for (const auto& e : graph.edges) {
        char label[32];
        std::snprintf(label, sizeof label, "%.3f", e.coeff);
        char width[32];
        std::snprintf(width, sizeof width, "%.2f", 0.5 + 3.5 * std::clamp(e.frequency, 0.0, 1.0));
        out << "  " << quote(e.from) << " -> " << quote(e.to) << " [label=\"" << label << "\", penwidth=" << width;
        if (driver_edges.count({e.from, e.to})) out << ", color=red";
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

void write_dot(const fs::path& path, const GraphDocument& graph, const GroundTruth* truth) {
    write_text(path, graph_to_dot(graph, truth));
}

void write_latent_scores(const fs::path& path, const LatentEstimate& latents) {
    std::vector<std::string> names;
    for (std::size_t k = 1; k <= latents.q; ++k) names.push_back("Ū" + std::to_string(k));
    write_csv(path, names, latents.scores.leftCols(static_cast<Eigen::Index>(latents.q)));
}

void write_latent_loadings(const fs::path& path, const LatentEstimate& latents) {
    auto out = open_out(path);
    out << "variable";
    for (std::size_t k = 1; k <= latents.q; ++k) out << ",Ū" << k;
    out << '\n';
    for (std::size_t i = 0; i < latents.input_names.size(); ++i) {
        out << csv_name(latents.input_names[i]);
        for (std::size_t k = 0; k < latents.q; ++k)
            out << ',' << format_double(latents.loadings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        out << '\n';
    }
    finish(out, path);
}

void write_eigen_report(const fs::path& path, const LatentEstimate& latents) {
    ojson j;
    j["eigenvalues"] = std::vector<double>(latents.all_eigenvalues.data(),
                                           latents.all_eigenvalues.data() + latents.all_eigenvalues.size());
    j["ceiling_q"] = latents.ceiling_q;
    j["q"] = latents.q;
    write_json_file(path, j);
}

void write_edge_frequencies(const fs::path& path, const EnsembleGraph& ensemble, const std::vector<std::string>& names) {
    auto out = open_out(path);
    out << "from,to,frequency\n";
    for (const auto& [edge, freq] : ensemble.edge_frequency) {
        out << csv_name(names.at(edge.first)) << ',' << csv_name(names.at(edge.second)) << ',' << format_double(freq)
            << '\n';
    }
    finish(out, path);
}

void write_coefficients(const fs::path& path, const LinearSem& sem) {
    const Dag& dag = sem.dag();
    auto out = open_out(path);
    out << "node,parent,coefficient\n";
    for (std::size_t i = 0; i < dag.size(); ++i) {
        const auto& p = sem.params(i);
        out << csv_name(dag.name(i)) << ",(intercept)," << format_double(p.intercept) << '\n';
        const auto& parents = dag.parents(i);
        for (std::size_t k = 0; k < parents.size(); ++k)
            out << csv_name(dag.name(i)) << ',' << csv_name(dag.name(parents[k])) << ',' << format_double(p.coeffs[k])
                << '\n';
    }
    finish(out, path);
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

std::string read_text(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorKind::missing_artifact, "missing file '" + path.string() + "'");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_failure, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string content_hash(const fs::path& path) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(read_text(path))));
    return buf;
}

}  // namespace latentdag
