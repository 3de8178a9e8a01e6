#ifndef LATENTDAG_TOOLS_COMMANDS_HPP
#define LATENTDAG_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace latentdag::cli {

struct SimulateOptions {
    std::filesystem::path out;
    std::string model = "benchmark";  // benchmark | random
    std::size_t n = 2000;
    std::uint64_t seed = 0;
    std::size_t children = 32;  // benchmark: children per latent
    std::size_t nodes = 30;     // random: observed variables
    std::size_t latents = 0;    // random: source latents
    std::size_t latent_children = 5;
    double density = 0.1;
};

struct LearnOptions {
    std::filesystem::path input;
    std::filesystem::path roles;
    std::filesystem::path truth;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::size_t boot = 50;
    double threshold = 0.4;
};

struct DeconfoundOptions : LearnOptions {
    std::size_t max_iter = 20;
    double epsilon = -1.0;  // negative: relative default
    std::size_t n_perm = 50;
    bool latents_as_sources = true;
    bool psr = false;
    std::string residuals = "averaged";  // averaged | refit
    bool exclude_outcomes = false;
};

struct EvalOptions {
    std::filesystem::path run;
    std::filesystem::path truth;
    std::filesystem::path out;
};

/// observed.csv, full.csv, truth.json, manifest.json.
void cmd_simulate(const SimulateOptions& options);
/// graph.json, graph.dot, coefficients.csv, edge_frequencies.csv, manifest.json.
void cmd_learn(const LearnOptions& options);
/// baseline/, iter_<k>/, final/, trace.csv, run.json, metrics.json, metrics_row.csv,
/// plot_data.csv, manifest.json.
void cmd_deconfound(const DeconfoundOptions& options);
/// metrics.json, metrics_row.csv, plot_data.csv and manifest.json recomputed from a run directory.
void cmd_eval(const EvalOptions& options);

/// 2 for configuration errors, 3 for data errors, 4 for numerical failures, 1 otherwise.
int exit_code(const std::exception& error);

/// Parses arguments, dispatches a subcommand and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace latentdag::cli

#endif  // LATENTDAG_TOOLS_COMMANDS_HPP
