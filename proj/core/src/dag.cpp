#include <latentdag/dag.hpp>
#include <latentdag/error.hpp>

#include <algorithm>
#include <functional>
#include <queue>

namespace latentdag {

std::string_view to_string(NodeRole role) {
    switch (role) {
        case NodeRole::predictor: return "predictor";
        case NodeRole::outcome: return "outcome";
        case NodeRole::latent_estimate: return "latent_estimate";
    }
    return "predictor";
}

NodeRole parse_role(std::string_view text) {
    if (text == "predictor") return NodeRole::predictor;
    if (text == "outcome") return NodeRole::outcome;
    if (text == "latent_estimate") return NodeRole::latent_estimate;
    throw Error(ErrorKind::invalid_roles, "unknown role '" + std::string(text) + "'");
}

namespace {

// Walks the subgraph of nodes Kahn's algorithm could not remove; every such node
// has an unremoved parent, so following parents must revisit a node.
std::vector<std::string> extract_cycle(std::span<const std::string> names,
                                       std::span<const Edge> edges,
                                       const std::vector<std::size_t>& in_degree) {
    const std::size_t n = names.size();
    std::vector<std::vector<std::size_t>> parents(n);
    for (const auto& e : edges) {
        if (in_degree[e.from] > 0 && in_degree[e.to] > 0) parents[e.to].push_back(e.from);
    }
    std::size_t start = 0;
    while (start < n && in_degree[start] == 0) ++start;
    std::vector<std::size_t> seen_at(n, n);
    std::vector<std::size_t> walk;
    std::size_t cur = start;
    while (seen_at[cur] == n) {
        seen_at[cur] = walk.size();
        walk.push_back(cur);
        cur = *std::min_element(parents[cur].begin(), parents[cur].end());
    }
    std::vector<std::string> cycle;
    for (std::size_t i = walk.size(); i-- > seen_at[cur];) cycle.push_back(names[walk[i]]);
    return cycle;
}

}  // namespace

std::vector<std::size_t> topological_order(std::span<const std::string> names, std::span<const Edge> edges) {
    const std::size_t n = names.size();
    std::vector<std::size_t> in_degree(n, 0);
    std::vector<std::vector<std::size_t>> children(n);
    for (const auto& e : edges) {
        if (e.from >= n || e.to >= n) throw Error(ErrorKind::unknown_node, "edge endpoint out of range");
        ++in_degree[e.to];
        children[e.from].push_back(e.to);
    }

    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (in_degree[i] == 0) ready.push(i);
    }
    std::vector<std::size_t> order;
    order.reserve(n);
    while (!ready.empty()) {
        const std::size_t node = ready.top();
        ready.pop();
        order.push_back(node);
        for (std::size_t child : children[node]) {
            if (--in_degree[child] == 0) ready.push(child);
        }
    }
    if (order.size() != n) throw CycleError(extract_cycle(names, edges, in_degree));
    return order;
}

Dag::Dag(std::vector<std::string> nodes, std::vector<NodeRole> roles)
    : Dag(std::move(nodes), std::move(roles), {}) {}

Dag::Dag(std::vector<std::string> nodes, std::vector<NodeRole> roles, std::vector<Edge> edges)
    : m_nodes(std::move(nodes)), m_roles(std::move(roles)), m_edges(std::move(edges)) {
    if (m_roles.empty()) m_roles.assign(m_nodes.size(), NodeRole::predictor);
    if (m_roles.size() != m_nodes.size()) throw Error(ErrorKind::shape_mismatch, "role count differs from node count");
    build();
}

Dag Dag::from_named_edges(std::vector<std::string> nodes,
                          std::vector<NodeRole> roles,
                          const std::vector<std::pair<std::string, std::string>>& edges) {
    Dag empty(nodes, roles);
    std::vector<Edge> indexed;
    indexed.reserve(edges.size());
    for (const auto& [from, to] : edges) indexed.push_back({empty.index(from), empty.index(to)});
    return Dag(std::move(nodes), empty.roles(), std::move(indexed));
}

void Dag::build() {
    m_index.clear();
    for (std::size_t i = 0; i < m_nodes.size(); ++i) {
        if (!m_index.emplace(m_nodes[i], i).second)
            throw Error(ErrorKind::name_collision, "duplicate node name '" + m_nodes[i] + "'");
    }
    std::sort(m_edges.begin(), m_edges.end());
    for (std::size_t k = 0; k < m_edges.size(); ++k) {
        const auto& e = m_edges[k];
        if (e.from >= m_nodes.size() || e.to >= m_nodes.size())
            throw Error(ErrorKind::unknown_node, "edge endpoint out of range");
        if (e.from == e.to) throw CycleError({m_nodes[e.from]});
        if (k > 0 && m_edges[k - 1] == e)
            throw Error(ErrorKind::invalid_config, "duplicate edge " + m_nodes[e.from] + " -> " + m_nodes[e.to]);
        if (m_roles[e.from] == NodeRole::outcome)
            throw Error(ErrorKind::invalid_constraints, "outcome '" + m_nodes[e.from] + "' has an outgoing edge");
    }
    m_parents.assign(m_nodes.size(), {});
    m_children.assign(m_nodes.size(), {});
    for (const auto& e : m_edges) {
        m_parents[e.to].push_back(e.from);
        m_children[e.from].push_back(e.to);
    }
    for (auto& p : m_parents) std::sort(p.begin(), p.end());
    ::latentdag::topological_order(m_nodes, m_edges);
}

std::optional<std::size_t> Dag::find(std::string_view name) const {
    auto it = m_index.find(std::string(name));
    if (it == m_index.end()) return std::nullopt;
    return it->second;
}

std::size_t Dag::index(std::string_view name) const {
    auto idx = find(name);
    if (!idx) throw Error(ErrorKind::unknown_node, "unknown node '" + std::string(name) + "'");
    return *idx;
}

bool Dag::has_edge(std::size_t from, std::size_t to) const {
    const auto& p = m_parents.at(to);
    return std::binary_search(p.begin(), p.end(), from);
}

bool Dag::would_create_cycle(std::size_t from, std::size_t to) const {
    if (from >= size() || to >= size()) throw Error(ErrorKind::unknown_node, "node index out of range");
    if (from == to) return true;
    // A cycle appears iff `from` is reachable from `to`.
    std::vector<char> seen(size(), 0);
    std::vector<std::size_t> stack{to};
    seen[to] = 1;
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        if (cur == from) return true;
        for (std::size_t c : m_children[cur]) {
            if (!seen[c]) {
                seen[c] = 1;
                stack.push_back(c);
            }
        }
    }
    return false;
}

Dag Dag::with_edge(std::size_t from, std::size_t to) const {
    std::vector<Edge> edges = m_edges;
    edges.push_back({from, to});
    return Dag(m_nodes, m_roles, std::move(edges));
}

Dag Dag::without_edge(std::size_t from, std::size_t to) const {
    std::vector<Edge> edges;
    edges.reserve(m_edges.size());
    for (const auto& e : m_edges) {
        if (!(e.from == from && e.to == to)) edges.push_back(e);
    }
    return Dag(m_nodes, m_roles, std::move(edges));
}

std::vector<std::size_t> Dag::topological_order() const {
    return ::latentdag::topological_order(m_nodes, m_edges);
}

bool Dag::operator==(const Dag& other) const {
    return m_nodes == other.m_nodes && m_roles == other.m_roles && m_edges == other.m_edges;
}

std::vector<std::string> markov_parents(const Dag& dag, std::string_view node) {
    std::vector<std::string> out;
    for (std::size_t p : dag.parents(dag.index(node))) out.push_back(dag.name(p));
    return out;
}

bool would_create_cycle(const Dag& dag, std::string_view from, std::string_view to) {
    return dag.would_create_cycle(dag.index(from), dag.index(to));
}

std::vector<std::string> topological_order(const Dag& dag) {
    std::vector<std::string> out;
    for (std::size_t i : dag.topological_order()) out.push_back(dag.name(i));
    return out;
}

}  // namespace latentdag
