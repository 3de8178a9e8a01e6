#ifndef LATENTDAG_ERROR_HPP
#define LATENTDAG_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace latentdag {

enum class ErrorKind {
    // configuration
    invalid_config,
    invalid_constraints,
    invalid_roles,
    name_collision,
    // data
    parse_error,
    io_failure,
    missing_artifact,
    unknown_node,
    kind_mismatch,
    shape_mismatch,
    node_set_mismatch,
    no_outcome_nodes,
    // numerical
    cycle_detected,
    rank_deficient,
    degenerate_variance,
    degenerate_input,
    invalid_cdf,
    non_comparable_scores,
};

std::string_view to_string(ErrorKind kind);

// Broad category used to pick a process exit code.
enum class ErrorCategory { config, data, numerical };

ErrorCategory category(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return m_kind; }
    /// The message without the kind prefix.
    const std::string& message() const noexcept { return m_message; }

private:
    ErrorKind m_kind;
    std::string m_message;
};

// Thrown by topological sorting and DAG construction; carries the nodes of one cycle.
class CycleError : public Error {
public:
    explicit CycleError(std::vector<std::string> cycle);

    const std::vector<std::string>& cycle() const noexcept { return m_cycle; }

private:
    std::vector<std::string> m_cycle;
};

}  // namespace latentdag

#endif  // LATENTDAG_ERROR_HPP
