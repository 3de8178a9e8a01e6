#ifndef LATENTDAG_DAG_HPP
#define LATENTDAG_DAG_HPP

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace latentdag {

enum class NodeRole { predictor, outcome, latent_estimate };

std::string_view to_string(NodeRole role);
NodeRole parse_role(std::string_view text);

struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;

    auto operator<=>(const Edge&) const = default;
};

/// Topological order of an arbitrary directed edge list over nodes [0, n).
/// Among ready nodes the smallest index goes first, so the order is unique for
/// a given input. Throws CycleError naming one cycle when the edges are cyclic.
std::vector<std::size_t> topological_order(std::span<const std::string> names, std::span<const Edge> edges);

/// Immutable directed acyclic graph over named nodes.
///
/// Node order is the canonical order used for deterministic iteration. Parent
/// and child lists are kept sorted by node index.
class Dag {
public:
    Dag() = default;

    /// Graph without edges. Roles default to predictor.
    explicit Dag(std::vector<std::string> nodes, std::vector<NodeRole> roles = {});

    /// Validates the edge set: no self-loops, no duplicates, no cycles, outcomes are sinks.
    Dag(std::vector<std::string> nodes, std::vector<NodeRole> roles, std::vector<Edge> edges);

    static Dag from_named_edges(std::vector<std::string> nodes,
                                std::vector<NodeRole> roles,
                                const std::vector<std::pair<std::string, std::string>>& edges);

    std::size_t size() const { return m_nodes.size(); }
    const std::vector<std::string>& nodes() const { return m_nodes; }
    const std::string& name(std::size_t node) const { return m_nodes.at(node); }
    NodeRole role(std::size_t node) const { return m_roles.at(node); }
    const std::vector<NodeRole>& roles() const { return m_roles; }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws UnknownNode.
    std::size_t index(std::string_view name) const;

    const std::vector<std::size_t>& parents(std::size_t node) const { return m_parents.at(node); }
    const std::vector<std::size_t>& children(std::size_t node) const { return m_children.at(node); }

    bool has_edge(std::size_t from, std::size_t to) const;
    /// All edges ordered by (from, to).
    const std::vector<Edge>& edges() const { return m_edges; }
    std::size_t edge_count() const { return m_edges.size(); }

    /// True iff adding from -> to would close a directed cycle (including self-loops).
    bool would_create_cycle(std::size_t from, std::size_t to) const;

    Dag with_edge(std::size_t from, std::size_t to) const;
    Dag without_edge(std::size_t from, std::size_t to) const;

    std::vector<std::size_t> topological_order() const;

    bool operator==(const Dag& other) const;

private:
    void build();

    std::vector<std::string> m_nodes;
    std::vector<NodeRole> m_roles;
    std::vector<Edge> m_edges;
    std::vector<std::vector<std::size_t>> m_parents;
    std::vector<std::vector<std::size_t>> m_children;
    std::unordered_map<std::string, std::size_t> m_index;
};

/// Parent names of `node`, in canonical order. Throws UnknownNode.
std::vector<std::string> markov_parents(const Dag& dag, std::string_view node);

/// Throws UnknownNode when either endpoint is missing.
bool would_create_cycle(const Dag& dag, std::string_view from, std::string_view to);

std::vector<std::string> topological_order(const Dag& dag);

}  // namespace latentdag

#endif  // LATENTDAG_DAG_HPP
