#include "commands.hpp"

#include <latentdag/diagnostics.hpp>
#include <latentdag/em.hpp>
#include <latentdag/error.hpp>
#include <latentdag/io.hpp>
#include <latentdag/random.hpp>
#include <latentdag/search.hpp>
#include <latentdag/simulate.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef LATENTDAG_VERSION
#define LATENTDAG_VERSION "0.0.0"
#endif

namespace latentdag::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

void require_config(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorKind::invalid_config, message);
}

void write_manifest(const fs::path& out, const std::string& command, const ojson& config, std::uint64_t seed,
                    const std::vector<std::pair<std::string, fs::path>>& inputs) {
    ojson m;
    m["tool"] = "latentdag";
    m["version"] = LATENTDAG_VERSION;
    m["command"] = command;
    m["seed"] = seed;
    m["config"] = config;
    m["config_hash"] = hex(fnv1a(config.dump()));
    ojson in = ojson::object();
    for (const auto& [name, path] : inputs) {
        if (path.empty()) continue;
        in[name] = {{"path", path.string()}, {"hash", content_hash(path)}};
    }
    m["inputs"] = in;
    write_text(out / "manifest.json", m.dump(2) + "\n");
}

ojson learn_config(const LearnOptions& o) {
    ojson c;
    c["input"] = o.input.string();
    c["roles"] = o.roles.string();
    c["truth"] = o.truth.string();
    c["threads"] = o.threads;
    c["boot"] = o.boot;
    c["threshold"] = o.threshold;
    return c;
}

struct Inputs {
    DataMatrix data;
    RolesSpec roles;
    std::optional<GroundTruth> truth;
};

Inputs load_inputs(const LearnOptions& o) {
    require_config(!o.input.empty(), "--input is required");
    require_config(!o.out.empty(), "--out is required");
    require_config(o.boot >= 1, "--boot must be at least 1");
    require_config(o.threshold > 0.0 && o.threshold <= 1.0, "--threshold must lie in (0, 1]");
    require_config(o.threads >= 1, "--threads must be at least 1");
    Inputs in;
    const Table table = read_csv(o.input);
    if (!o.roles.empty()) {
        in.roles = read_roles(o.roles);
    } else if (!o.truth.empty()) {
        in.roles = parse_roles(read_text(o.truth));
    }
    if (!o.truth.empty()) in.truth = read_truth(o.truth);
    in.data = apply_roles(table, in.roles);
    if (in.data.rows() < 3) throw Error(ErrorKind::degenerate_input, "need at least 3 rows of data");
    return in;
}

BootstrapConfig bootstrap_config(const LearnOptions& o) {
    BootstrapConfig b;
    b.n_boot = o.boot;
    b.threshold = o.threshold;
    b.seed = o.seed;
    b.threads = o.threads;
    return b;
}

void write_graph_set(const fs::path& dir, const EnsembleGraph& ensemble, const DataMatrix& data,
                     const GroundTruth* truth) {
    const GraphDocument doc = graph_document(ensemble);
    write_graph_json(dir / "graph.json", doc);
    write_dot(dir / "graph.dot", doc, truth);
    write_coefficients(dir / "coefficients.csv", ensemble.averaged_sem);
    write_edge_frequencies(dir / "edge_frequencies.csv", ensemble, data.names());
}

void write_iterate(const fs::path& dir, const EmIterate& it, const GroundTruth* truth) {
    write_graph_set(dir, it.ensemble, it.data, truth);
    if (it.q > 0) {
        write_latent_scores(dir / "latents.csv", it.latents);
        write_latent_loadings(dir / "loadings.csv", it.latents);
        write_eigen_report(dir / "eigen.json", it.latents);
    }
}

std::string iterate_dir(std::size_t k) { return k == 0 ? "baseline" : "iter_" + std::to_string(k); }

// ---- evaluation ----------------------------------------------------------

struct TraceRow {
    std::size_t iteration = 0;
    double bic = 0.0;
    double outcome_bic = 0.0;
    std::size_t q = 0;
    std::size_t edge_count = 0;
    bool accepted = false;
};

std::vector<TraceRow> read_trace(const fs::path& path) {
    const Table t = parse_csv(read_text(path));
    auto col = [&](const std::string& name) {
        for (std::size_t j = 0; j < t.names.size(); ++j) {
            if (t.names[j] == name) return static_cast<Eigen::Index>(j);
        }
        throw Error(ErrorKind::parse_error, path.string() + ": missing column '" + name + "'");
    };
    const auto ci = col("iteration"), cb = col("bic"), co = col("outcome_bic"), cq = col("q"), ce = col("edge_count"),
               ca = col("accepted");
    std::vector<TraceRow> rows;
    for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
        rows.push_back({static_cast<std::size_t>(t.values(i, ci)), t.values(i, cb), t.values(i, co),
                        static_cast<std::size_t>(t.values(i, cq)), static_cast<std::size_t>(t.values(i, ce)),
                        t.values(i, ca) != 0.0});
    }
    if (rows.empty()) throw Error(ErrorKind::parse_error, path.string() + ": empty trace");
    return rows;
}

ojson read_json_file(const fs::path& path) {
    try {
        return ojson::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse_error, path.string() + ": " + e.what());
    }
}

// Observed data plus the iterate's latent columns, matching the graph's node names.
DataMatrix iterate_data(const Table& observed, const fs::path& dir, std::size_t q) {
    if (q == 0) return DataMatrix::continuous(observed.names, observed.values);
    const Table latents = read_csv(dir / "latents.csv");
    if (latents.values.rows() != observed.values.rows() || latents.values.cols() != static_cast<Eigen::Index>(q))
        throw Error(ErrorKind::shape_mismatch, (dir / "latents.csv").string() + " does not match the run");
    auto names = observed.names;
    names.insert(names.end(), latents.names.begin(), latents.names.end());
    Eigen::MatrixXd values(observed.values.rows(), observed.values.cols() + latents.values.cols());
    values << observed.values, latents.values;
    return DataMatrix::continuous(std::move(names), std::move(values));
}

std::size_t outcome_parent_count(const Dag& dag) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < dag.size(); ++j) {
        if (dag.role(j) == NodeRole::outcome) n += dag.parents(j).size();
    }
    return n;
}

struct Evaluation {
    ojson metrics;
    std::string plot_csv;
    std::string row_csv;
};

Evaluation evaluate(const fs::path& run, const fs::path& truth_path) {
    const ojson summary = read_json_file(run / "run.json");
    const ojson manifest = read_json_file(run / "manifest.json");
    const auto trace = read_trace(run / "trace.csv");
    std::size_t best = 0;
    fs::path input;
    try {
        best = summary.at("best_iteration").get<std::size_t>();
        input = manifest.at("config").at("input").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse_error, run.string() + ": " + e.what());
    }
    const Table observed = read_csv(input);
    const auto n_samples = static_cast<std::size_t>(observed.values.rows());

    std::optional<GroundTruth> truth;
    std::map<std::string, Eigen::VectorXd> true_latents;
    if (!truth_path.empty()) {
        truth = read_truth(truth_path);
        const fs::path full = truth_path.parent_path() / "full.csv";
        if (fs::exists(full)) {
            const Table t = read_csv(full);
            for (const auto& l : truth->latent_names) {
                for (std::size_t j = 0; j < t.names.size(); ++j) {
                    if (t.names[j] == l) true_latents[l] = t.values.col(static_cast<Eigen::Index>(j));
                }
            }
        }
    }

    const Dag baseline_dag = read_graph_json(run / "baseline" / "graph.json").dag();
    const double baseline_outcome_bic = trace.front().outcome_bic;

    Evaluation ev;
    std::ostringstream plot;
    plot << "iteration,metric,value\n";
    auto emit = [&](std::size_t k, const std::string& metric, double v) {
        plot << k << ',' << metric << ',' << format_double(v) << '\n';
    };

    ojson iterations = ojson::array();
    ojson final_block;
    std::vector<std::pair<std::string, std::string>> row;  // flat key/value
    for (const auto& tr : trace) {
        const fs::path dir = run / iterate_dir(tr.iteration);
        const GraphDocument doc = read_graph_json(dir / "graph.json");
        const Dag dag = doc.dag();
        const LinearSem sem = doc.sem();
        const DataMatrix data = iterate_data(observed, dir, tr.q);

        ojson it;
        it["iteration"] = tr.iteration;
        it["bic"] = tr.bic;
        it["outcome_bic"] = tr.outcome_bic;
        it["q"] = tr.q;
        it["edge_count"] = tr.edge_count;
        it["accepted"] = tr.accepted;
        it["outcome_parents"] = outcome_parent_count(dag);
        const double mvif = mean_outcome_vif(data, dag);
        it["mean_outcome_vif"] = number(mvif);
        emit(tr.iteration, "bic", tr.bic);
        emit(tr.iteration, "outcome_bic", tr.outcome_bic);
        emit(tr.iteration, "q", static_cast<double>(tr.q));
        emit(tr.iteration, "edge_count", static_cast<double>(tr.edge_count));
        emit(tr.iteration, "mean_outcome_vif", mvif);

        ojson r2 = ojson::object();
        CapRecord cap;
        if (truth) {
            const double all = coefficient_rmse(sem, *truth, RmseScope::all_into_outcomes);
            const double drivers = coefficient_rmse(sem, *truth, RmseScope::true_drivers);
            std::size_t fp = 0;
            for (const auto& o : truth->outcome_names) fp += false_positive_parents(dag, *truth, o);
            const auto sm = structural_metrics(dag, truth->sem.dag(), truth->latent_names);
            cap = improvement_cap(baseline_outcome_bic, tr.outcome_bic, *truth, baseline_dag, n_samples);
            it["coef_rmse_all"] = all;
            it["coef_rmse_drivers"] = drivers;
            it["outcome_false_positive_parents"] = fp;
            it["skeleton_f1"] = sm.skeleton_f1;
            emit(tr.iteration, "coef_rmse_all", all);
            emit(tr.iteration, "coef_rmse_drivers", drivers);
            emit(tr.iteration, "outcome_false_positive_parents", static_cast<double>(fp));
            emit(tr.iteration, "skeleton_f1", sm.skeleton_f1);
            if (tr.q > 0 && !true_latents.empty()) {
                Eigen::MatrixXd scores(data.rows(), static_cast<Eigen::Index>(tr.q));
                for (std::size_t k = 0; k < tr.q; ++k)
                    scores.col(static_cast<Eigen::Index>(k)) = data.column(observed.names.size() + k);
                for (const auto& [name, v] : latent_r2(true_latents, scores)) {
                    r2[name] = v;
                    emit(tr.iteration, "latent_r2_" + name, v);
                }
            }
            it["latent_r2"] = r2;
            it["cap"] = {{"lhs", cap.lhs}, {"bound", cap.bound}, {"satisfied", cap.satisfied}};
        }
        iterations.push_back(it);

        if (tr.iteration != best) continue;
        final_block = it;
        ojson vifs = ojson::array();
        for (std::size_t j = 0; j < dag.size(); ++j) {
            if (dag.role(j) != NodeRole::outcome) continue;
            const auto parents = markov_parents(dag, dag.name(j));
            for (const auto& p : parents)
                vifs.push_back({{"outcome", dag.name(j)}, {"parent", p}, {"vif", number(vif(data, dag.name(j), parents, p))}});
        }
        final_block["vif"] = vifs;
        if (truth) {
            const auto sm = structural_metrics(dag, truth->sem.dag(), truth->latent_names);
            final_block["structure"] = {{"true_positive", sm.true_positive},
                                        {"false_positive", sm.false_positive},
                                        {"false_negative", sm.false_negative},
                                        {"skeleton_true_positive", sm.skeleton_true_positive},
                                        {"skeleton_false_positive", sm.skeleton_false_positive},
                                        {"skeleton_false_negative", sm.skeleton_false_negative},
                                        {"skeleton_precision", sm.skeleton_precision},
                                        {"skeleton_recall", sm.skeleton_recall},
                                        {"skeleton_f1", sm.skeleton_f1}};
            final_block["cap"] = {{"lhs", cap.lhs}, {"k", cap.k}, {"bound", cap.bound}, {"satisfied", cap.satisfied}};
        } else {
            final_block["cap"] = "not evaluable";
        }

        row.emplace_back("best_iteration", std::to_string(best));
        for (const char* key : {"bic", "outcome_bic", "q", "edge_count", "outcome_parents", "mean_outcome_vif",
                                "coef_rmse_all", "coef_rmse_drivers", "outcome_false_positive_parents", "skeleton_f1"}) {
            if (!it.contains(key)) continue;
            const auto& v = it.at(key);
            row.emplace_back(key, v.is_number_float() ? format_double(v.get<double>()) : v.dump());
        }
        for (const auto& [name, v] : r2.items()) row.emplace_back("latent_r2_" + name, format_double(v.get<double>()));
        if (truth) {
            row.emplace_back("cap_lhs", format_double(cap.lhs));
            row.emplace_back("cap_bound", format_double(cap.bound));
            row.emplace_back("cap_satisfied", cap.satisfied ? "1" : "0");
        }
    }

    ev.metrics["best_iteration"] = best;
    ev.metrics["stop_reason"] = summary.value("stop_reason", "");
    ev.metrics["n_samples"] = n_samples;
    ev.metrics["final"] = final_block;
    ev.metrics["iterations"] = iterations;
    ev.plot_csv = plot.str();
    std::string header, values;
    for (std::size_t i = 0; i < row.size(); ++i) {
        header += (i ? "," : "") + row[i].first;
        values += (i ? "," : "") + row[i].second;
    }
    ev.row_csv = header + "\n" + values + "\n";
    return ev;
}

void write_evaluation(const fs::path& out, const Evaluation& ev) {
    write_text(out / "metrics.json", ev.metrics.dump(2) + "\n");
    write_text(out / "plot_data.csv", ev.plot_csv);
    write_text(out / "metrics_row.csv", ev.row_csv);
}

}  // namespace

void cmd_simulate(const SimulateOptions& o) {
    require_config(!o.out.empty(), "--out is required");
    require_config(o.n >= 1, "--n must be at least 1");
    SimBundle bundle;
    ojson config;
    config["model"] = o.model;
    config["n"] = o.n;
    if (o.model == "benchmark") {
        require_config(o.children >= 1, "--children must be at least 1");
        config["children"] = o.children;
        bundle = confounded_benchmark(o.n, o.seed, o.children);
    } else if (o.model == "random") {
        config["nodes"] = o.nodes;
        config["latents"] = o.latents;
        config["latent_children"] = o.latent_children;
        config["density"] = o.density;
        require_config(o.density >= 0.0 && o.density <= 1.0, "--density must lie in [0, 1]");
        const GroundTruth truth = random_pleiotropic_truth(o.nodes, o.latents, o.latent_children, o.density,
                                                           derive_seed(o.seed, "simulate/structure"));
        bundle = sample_sem(truth, o.n, o.seed);
    } else {
        throw Error(ErrorKind::invalid_config, "unknown model '" + o.model + "' (expected benchmark or random)");
    }
    write_bundle(o.out, bundle);
    write_manifest(o.out, "simulate", config, o.seed, {});
}

void cmd_learn(const LearnOptions& o) {
    const Inputs in = load_inputs(o);
    const EnsembleGraph ensemble = bootstrap_consensus(in.data, in.roles.constraints, bootstrap_config(o));
    write_graph_set(o.out, ensemble, in.data, in.truth ? &*in.truth : nullptr);
    write_manifest(o.out, "learn", learn_config(o), o.seed, {{"input", o.input}, {"roles", o.roles}, {"truth", o.truth}});
}

void cmd_deconfound(const DeconfoundOptions& o) {
    const Inputs in = load_inputs(o);
    require_config(o.max_iter >= 1, "--max-iter must be at least 1");
    require_config(o.n_perm >= 1, "--n-perm must be at least 1");
    require_config(o.residuals == "averaged" || o.residuals == "refit", "--residuals must be averaged or refit");

    EmConfig config;
    config.epsilon = o.epsilon;
    config.max_iter = o.max_iter;
    config.latents_are_sources = o.latents_as_sources;
    config.seed = o.seed;
    config.threads = o.threads;
    config.constraints = in.roles.constraints;
    config.bootstrap = bootstrap_config(o);
    config.latent.n_perm = o.n_perm;
    config.latent.exclude_outcomes = o.exclude_outcomes;
    config.residuals.use_psr = o.psr;
    config.residual_source = o.residuals == "refit" ? ResidualSource::refit : ResidualSource::averaged;
    const EmResult result = run_em(in.data, config);

    const GroundTruth* truth = in.truth ? &*in.truth : nullptr;
    std::ostringstream trace;
    trace << "iteration,bic,outcome_bic,q,edge_count,accepted\n";
    for (const auto& it : result.trace.iterates) {
        write_iterate(o.out / iterate_dir(it.iteration), it, truth);
        trace << it.iteration << ',' << format_double(it.bic_total) << ',' << format_double(it.outcome_bic) << ','
              << it.q << ',' << it.edge_count << ',' << (it.accepted ? 1 : 0) << '\n';
    }
    write_iterate(o.out / "final", result.final_iterate(), truth);
    write_text(o.out / "trace.csv", trace.str());

    ojson summary;
    summary["best_iteration"] = result.final_iterate().iteration;
    summary["stop_reason"] = result.trace.stop_reason;
    summary["latent_detected"] = result.latent_detected;
    summary["epsilon"] = result.epsilon;
    write_text(o.out / "run.json", summary.dump(2) + "\n");

    ojson cfg = learn_config(o);
    cfg["max_iter"] = o.max_iter;
    cfg["epsilon"] = o.epsilon;
    cfg["n_perm"] = o.n_perm;
    cfg["latents_as_sources"] = o.latents_as_sources;
    cfg["psr"] = o.psr;
    cfg["residuals"] = o.residuals;
    cfg["exclude_outcomes"] = o.exclude_outcomes;
    write_manifest(o.out, "deconfound", cfg, o.seed, {{"input", o.input}, {"roles", o.roles}, {"truth", o.truth}});
    write_evaluation(o.out, evaluate(o.out, o.truth));
}

void cmd_eval(const EvalOptions& o) {
    require_config(!o.run.empty(), "--run is required");
    require_config(!o.out.empty(), "--out is required");
    const Evaluation ev = evaluate(o.run, o.truth);
    write_evaluation(o.out, ev);
    ojson cfg;
    cfg["run"] = o.run.string();
    cfg["truth"] = o.truth.string();
    write_manifest(o.out, "eval", cfg, 0,
                   {{"trace", o.run / "trace.csv"}, {"final_graph", o.run / "final" / "graph.json"}, {"truth", o.truth}});
}

int exit_code(const std::exception& error) {
    if (const auto* e = dynamic_cast<const Error*>(&error)) {
        switch (category(e->kind())) {
            case ErrorCategory::config: return 2;
            case ErrorCategory::data: return 3;
            case ErrorCategory::numerical: return 4;
        }
    }
    if (dynamic_cast<const CLI::Error*>(&error)) return 2;
    if (dynamic_cast<const fs::filesystem_error*>(&error)) return 3;
    return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian DAG structure learning with latent confounder reconstruction", "latentdag"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(LATENTDAG_VERSION));

    SimulateOptions so;
    auto* sim = app.add_subcommand("simulate", "Sample a synthetic data bundle with known ground truth");
    sim->add_option("--out", so.out, "Output directory")->required();
    sim->add_option("--model", so.model, "benchmark or random")->capture_default_str();
    sim->add_option("--n", so.n, "Number of samples")->capture_default_str();
    sim->add_option("--seed", so.seed, "Root seed")->capture_default_str();
    sim->add_option("--children", so.children, "Benchmark: extra children per latent")->capture_default_str();
    sim->add_option("--nodes", so.nodes, "Random: observed variables")->capture_default_str();
    sim->add_option("--latents", so.latents, "Random: source latents")->capture_default_str();
    sim->add_option("--latent-children", so.latent_children, "Random: children per latent")->capture_default_str();
    sim->add_option("--density", so.density, "Random: edge density")->capture_default_str();

    auto add_learn_flags = [](CLI::App* cmd, LearnOptions& o) {
        cmd->add_option("--input", o.input, "Headered CSV data file")->required();
        cmd->add_option("--roles", o.roles, "Roles and constraints JSON");
        cmd->add_option("--truth", o.truth, "Ground-truth JSON (also supplies outcome roles)");
        cmd->add_option("--out", o.out, "Output directory")->required();
        cmd->add_option("--seed", o.seed, "Root seed")->capture_default_str();
        cmd->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
        cmd->add_option("--boot", o.boot, "Bootstrap replicates")->capture_default_str();
        cmd->add_option("--threshold", o.threshold, "Consensus edge frequency threshold")->capture_default_str();
    };

    LearnOptions lo;
    auto* learn = app.add_subcommand("learn", "Learn a bootstrap consensus graph");
    add_learn_flags(learn, lo);

    DeconfoundOptions dopt;
    auto* dec = app.add_subcommand("deconfound", "Iteratively reconstruct latent confounders and relearn");
    add_learn_flags(dec, dopt);
    dec->add_option("--max-iter", dopt.max_iter, "Maximum latent iterations")->capture_default_str();
    dec->add_option("--epsilon", dopt.epsilon, "Score improvement tolerance; 0 runs all iterations, negative uses 1e-6 x |initial BIC|")
        ->capture_default_str();
    dec->add_option("--n-perm", dopt.n_perm, "Parallel-analysis permutations")->capture_default_str();
    dec->add_option("--latents-as-sources", dopt.latents_as_sources, "Forbid parents of latent estimates")
        ->capture_default_str();
    dec->add_option("--psr", dopt.psr, "Probability-scale residuals for continuous variables")->capture_default_str();
    dec->add_option("--residuals", dopt.residuals, "averaged or refit coefficients for residuals")->capture_default_str();
    dec->add_option("--exclude-outcomes", dopt.exclude_outcomes, "Leave outcome residuals out of the PCA")
        ->capture_default_str();

    EvalOptions eo;
    auto* ev = app.add_subcommand("eval", "Recompute metrics from a deconfound run directory");
    ev->add_option("--run", eo.run, "Run directory")->required();
    ev->add_option("--truth", eo.truth, "Ground-truth JSON");
    ev->add_option("--out", eo.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            cmd_simulate(so);
            out << "wrote simulation bundle to " << so.out.string() << '\n';
        } else if (learn->parsed()) {
            cmd_learn(lo);
            out << "wrote consensus graph to " << lo.out.string() << '\n';
        } else if (dec->parsed()) {
            cmd_deconfound(dopt);
            out << "wrote deconfounding run to " << dopt.out.string() << '\n';
        } else if (ev->parsed()) {
            cmd_eval(eo);
            out << "wrote metrics to " << eo.out.string() << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e);
    }
    return 0;
}

}  // namespace latentdag::cli
