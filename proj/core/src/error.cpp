#include <latentdag/error.hpp>

namespace latentdag {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_config: return "InvalidConfig";
        case ErrorKind::invalid_constraints: return "InvalidConstraints";
        case ErrorKind::invalid_roles: return "InvalidRoles";
        case ErrorKind::name_collision: return "NameCollision";
        case ErrorKind::parse_error: return "ParseError";
        case ErrorKind::io_failure: return "IoFailure";
        case ErrorKind::missing_artifact: return "MissingArtifact";
        case ErrorKind::unknown_node: return "UnknownNode";
        case ErrorKind::kind_mismatch: return "KindMismatch";
        case ErrorKind::shape_mismatch: return "ShapeMismatch";
        case ErrorKind::node_set_mismatch: return "NodeSetMismatch";
        case ErrorKind::no_outcome_nodes: return "NoOutcomeNodes";
        case ErrorKind::cycle_detected: return "CycleDetected";
        case ErrorKind::rank_deficient: return "RankDeficient";
        case ErrorKind::degenerate_variance: return "DegenerateVariance";
        case ErrorKind::degenerate_input: return "DegenerateInput";
        case ErrorKind::invalid_cdf: return "InvalidCdf";
        case ErrorKind::non_comparable_scores: return "NonComparableScores";
    }
    return "Unknown";
}

ErrorCategory category(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_config:
        case ErrorKind::invalid_constraints:
        case ErrorKind::invalid_roles:
        case ErrorKind::name_collision:
            return ErrorCategory::config;
        case ErrorKind::parse_error:
        case ErrorKind::io_failure:
        case ErrorKind::missing_artifact:
        case ErrorKind::unknown_node:
        case ErrorKind::kind_mismatch:
        case ErrorKind::shape_mismatch:
        case ErrorKind::node_set_mismatch:
        case ErrorKind::no_outcome_nodes:
            return ErrorCategory::data;
        default:
            return ErrorCategory::numerical;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), m_kind(kind), m_message(message) {}

namespace {
std::string describe_cycle(const std::vector<std::string>& cycle) {
    std::string out = "cycle ";
    for (const auto& n : cycle) {
        out += n;
        out += " -> ";
    }
    if (!cycle.empty()) out += cycle.front();
    return out;
}
}  // namespace

CycleError::CycleError(std::vector<std::string> cycle)
    : Error(ErrorKind::cycle_detected, describe_cycle(cycle)), m_cycle(std::move(cycle)) {}

}  // namespace latentdag
