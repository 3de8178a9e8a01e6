#include <latentdag/error.hpp>
#include <latentdag/parallel.hpp>
#include <latentdag/random.hpp>
#include <latentdag/search.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace latentdag {

namespace {

constexpr double kImproveTol = 1e-9;

struct Rules {
    std::size_t n = 0;
    std::size_t max_in_degree = 8;
    std::vector<char> forbidden;  // n*n, [from * n + to]
    std::vector<char> required;
    std::vector<char> no_parents;
    std::vector<char> no_children;

    bool is_required(std::size_t from, std::size_t to) const { return required[from * n + to]; }
    bool may_add(std::size_t from, std::size_t to) const {
        return from != to && !forbidden[from * n + to] && !no_parents[to] && !no_children[from];
    }
};

Rules resolve_rules(const DataMatrix& data, const Constraints& c, std::size_t max_in_degree) {
    Rules r;
    r.n = static_cast<std::size_t>(data.cols());
    r.max_in_degree = max_in_degree;
    r.forbidden.assign(r.n * r.n, 0);
    r.required.assign(r.n * r.n, 0);
    r.no_parents.assign(r.n, 0);
    r.no_children.assign(r.n, 0);
    auto lookup = [&](const std::string& name) {
        auto j = data.find(name);
        if (!j) throw Error(ErrorKind::invalid_constraints, "constraint names unknown column '" + name + "'");
        return *j;
    };
    for (std::size_t j = 0; j < r.n; ++j) {
        if (data.info(j).role == NodeRole::outcome) r.no_children[j] = 1;
    }
    for (const auto& s : c.forced_sources) r.no_parents[lookup(s)] = 1;
    for (const auto& [a, b] : c.forbidden) r.forbidden[lookup(a) * r.n + lookup(b)] = 1;

    std::vector<Edge> req;
    std::vector<std::size_t> in_degree(r.n, 0);
    for (const auto& [a, b] : c.required) {
        const std::size_t from = lookup(a);
        const std::size_t to = lookup(b);
        if (!r.may_add(from, to))
            throw Error(ErrorKind::invalid_constraints, "required edge " + a + " -> " + b + " violates another constraint");
        if (!r.required[from * r.n + to]) {
            r.required[from * r.n + to] = 1;
            req.push_back({from, to});
            ++in_degree[to];
        }
    }
    for (std::size_t j = 0; j < r.n; ++j) {
        if (in_degree[j] > max_in_degree)
            throw Error(ErrorKind::invalid_constraints, "required parents of '" + data.info(j).name + "' exceed max in-degree");
    }
    const auto names = data.names();
    try {
        topological_order(names, req);
    } catch (const CycleError& e) {
        throw Error(ErrorKind::invalid_constraints, std::string("required edges are cyclic: ") + e.what());
    }
    return r;
}

struct Move {
    enum Kind { add, remove, reverse } kind = add;
    std::size_t from = 0;
    std::size_t to = 0;
    double delta = 0.0;
};

class Climber {
public:
    Climber(GramScorer& scorer, const Rules& rules) : m_scorer(scorer), m_rules(rules) {
        m_parents.assign(rules.n, {});
        m_adj.assign(rules.n * rules.n, 0);
        m_children.assign(rules.n, {});
        m_local.assign(rules.n, 0.0);
        for (std::size_t j = 0; j < rules.n; ++j) {
            for (std::size_t i = 0; i < rules.n; ++i) {
                if (rules.is_required(i, j)) link(i, j);
            }
        }
        rescore_all();
    }

    void set_edges(const std::vector<Edge>& edges) {
        for (auto& p : m_parents) p.clear();
        for (auto& c : m_children) c.clear();
        m_adj.assign(m_rules.n * m_rules.n, 0);
        for (const auto& e : edges) link(e.from, e.to);
        rescore_all();
    }

    double total() const { return m_total; }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (std::size_t j = 0; j < m_rules.n; ++j) {
            for (std::size_t i : m_parents[j]) out.push_back({i, j});
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    bool has_edge(std::size_t from, std::size_t to) const {
        return m_adj[from * m_rules.n + to] != 0;
    }

    /// Best legal move; delta is +inf when none exists. Ties go to the first move in
    /// (from, to) row-major order.
    Move best_move() {
        Move best;
        best.delta = std::numeric_limits<double>::infinity();
        const std::size_t n = m_rules.n;
        for (std::size_t from = 0; from < n; ++from) {
            const char* adj_row = &m_adj[from * n];
            const double* delta_row = &m_delta[from * n];
            for (std::size_t to = 0; to < n; ++to) {
                const double toggle = delta_row[to];
                if (adj_row[to]) {
                    if (toggle < best.delta) best = {Move::remove, from, to, toggle};
                    const double delta = toggle + m_delta[to * n + from];
                    if (delta < best.delta && !reaches(from, to, true)) best = {Move::reverse, from, to, delta};
                } else if (toggle < best.delta && !m_adj[to * n + from] && !reaches(to, from, false)) {
                    best = {Move::add, from, to, toggle};
                }
            }
        }
        return best;
    }

    void apply(const Move& m) {
        switch (m.kind) {
            case Move::add: link(m.from, m.to); break;
            case Move::remove: unlink(m.from, m.to); break;
            case Move::reverse:
                unlink(m.from, m.to);
                link(m.to, m.from);
                break;
        }
        rescore(m.to);
        if (m.kind == Move::reverse) rescore(m.from);
        refresh_column(m.to);
        if (m.kind == Move::reverse) refresh_column(m.from);
        m_total = 0.0;
        for (double v : m_local) m_total += v;
    }

    /// Greedy descent; records the total after each accepted move.
    void climb(std::vector<double>* trace) {
        while (true) {
            const Move m = best_move();
            if (!(m.delta < -kImproveTol)) break;
            apply(m);
            if (trace) trace->push_back(m_total);
        }
    }

    /// Applies up to `count` random legal moves.
    void perturb(Rng& rng, std::size_t count) {
        const std::size_t n = m_rules.n;
        if (n < 2) return;
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::size_t done = 0;
        for (std::size_t attempt = 0; attempt < 50 * count && done < count; ++attempt) {
            const std::size_t a = pick(rng);
            const std::size_t b = pick(rng);
            if (a == b) continue;
            Move m{Move::add, a, b, 0.0};
            if (has_edge(a, b)) {
                if (m_rules.is_required(a, b)) continue;
                const bool can_reverse = m_rules.may_add(b, a) && m_parents[a].size() < m_rules.max_in_degree &&
                                         !reaches(a, b, true);
                m.kind = (can_reverse && std::bernoulli_distribution(0.5)(rng)) ? Move::reverse : Move::remove;
            } else if (has_edge(b, a)) {
                continue;
            } else {
                if (!m_rules.may_add(a, b) || m_parents[b].size() >= m_rules.max_in_degree || reaches(b, a, false))
                    continue;
            }
            apply(m);
            ++done;
        }
    }

private:
    void link(std::size_t from, std::size_t to) {
        m_adj[from * m_rules.n + to] = 1;
        auto& p = m_parents[to];
        p.insert(std::upper_bound(p.begin(), p.end(), from), from);
        m_children[from].push_back(to);
    }

    void unlink(std::size_t from, std::size_t to) {
        m_adj[from * m_rules.n + to] = 0;
        auto& p = m_parents[to];
        p.erase(std::lower_bound(p.begin(), p.end(), from));
        auto& c = m_children[from];
        c.erase(std::find(c.begin(), c.end(), to));
    }

    void rescore(std::size_t node) { m_local[node] = m_scorer.local_bic(node, m_parents[node]); }

    void rescore_all() {
        m_total = 0.0;
        m_delta.assign(m_rules.n * m_rules.n, std::numeric_limits<double>::infinity());
        for (std::size_t j = 0; j < m_rules.n; ++j) {
            rescore(j);
            m_total += m_local[j];
        }
        for (std::size_t j = 0; j < m_rules.n; ++j) refresh_column(j);
    }

    // Score change at `to` from toggling each candidate parent; +inf when the toggle is illegal.
    void refresh_column(std::size_t to) {
        const std::size_t n = m_rules.n;
        const bool full = m_parents[to].size() >= m_rules.max_in_degree;
        for (std::size_t from = 0; from < n; ++from) {
            double& d = m_delta[from * n + to];
            d = std::numeric_limits<double>::infinity();
            if (from == to) continue;
            if (has_edge(from, to)) {
                if (!m_rules.is_required(from, to)) d = score_without(to, from) - m_local[to];
            } else if (!full && m_rules.may_add(from, to)) {
                d = score_with(to, from) - m_local[to];
            }
        }
    }

    double score_with(std::size_t node, std::size_t extra) {
        m_buffer = m_parents[node];
        m_buffer.insert(std::upper_bound(m_buffer.begin(), m_buffer.end(), extra), extra);
        return m_scorer.local_bic(node, m_buffer);
    }

    double score_without(std::size_t node, std::size_t drop) {
        m_buffer.clear();
        for (std::size_t p : m_parents[node]) {
            if (p != drop) m_buffer.push_back(p);
        }
        return m_scorer.local_bic(node, m_buffer);
    }

    // Is `target` reachable from `start`? With skip_direct, the edge start -> target is ignored.
    bool reaches(std::size_t start, std::size_t target, bool skip_direct) {
        m_seen.assign(m_rules.n, 0);
        m_stack.clear();
        m_stack.push_back(start);
        m_seen[start] = 1;
        while (!m_stack.empty()) {
            const std::size_t cur = m_stack.back();
            m_stack.pop_back();
            for (std::size_t c : m_children[cur]) {
                if (skip_direct && cur == start && c == target) continue;
                if (c == target) return true;
                if (!m_seen[c]) {
                    m_seen[c] = 1;
                    m_stack.push_back(c);
                }
            }
        }
        return false;
    }

    GramScorer& m_scorer;
    const Rules& m_rules;
    std::vector<std::vector<std::size_t>> m_parents;
    std::vector<std::vector<std::size_t>> m_children;
    std::vector<double> m_local;
    std::vector<double> m_delta;  // [from * n + to]
    std::vector<char> m_adj;      // [from * n + to]
    double m_total = 0.0;
    std::vector<std::size_t> m_buffer;
    std::vector<char> m_seen;
    std::vector<std::size_t> m_stack;
};

ClimbTrace run_search(const DataMatrix& data, const Constraints& constraints, const SearchConfig& config, bool traced) {
    const Rules rules = resolve_rules(data, constraints, config.max_in_degree);
    GramScorer scorer(data);
    Climber climber(scorer, rules);

    ClimbTrace out;
    climber.climb(traced ? &out.accepted_scores : nullptr);
    std::vector<Edge> best = climber.edges();
    double best_total = climber.total();

    const std::size_t kicks = std::max<std::size_t>(2, rules.n / 3);
    for (std::size_t r = 1; r <= config.restarts; ++r) {
        Rng rng = make_rng(config.seed, "restart", r);
        climber.set_edges(best);
        climber.perturb(rng, kicks);
        climber.climb(nullptr);
        if (climber.total() < best_total - kImproveTol) {
            best_total = climber.total();
            best = climber.edges();
        }
    }
    out.graph = fit_dag(data, Dag(data.names(), data.roles(), best));
    return out;
}

}  // namespace

ScoredGraph hill_climb(const DataMatrix& data, const Constraints& constraints, const SearchConfig& config) {
    return run_search(data, constraints, config, false).graph;
}

ClimbTrace hill_climb_traced(const DataMatrix& data, const Constraints& constraints, const SearchConfig& config) {
    return run_search(data, constraints, config, true);
}

bool is_local_optimum(const DataMatrix& data, const Dag& dag, const Constraints& constraints,
                      std::size_t max_in_degree, double tol) {
    const Rules rules = resolve_rules(data, constraints, max_in_degree);
    GramScorer scorer(data);
    Climber climber(scorer, rules);
    climber.set_edges(dag.edges());
    return !(climber.best_move().delta < -tol);
}

double EnsembleGraph::directed_frequency(std::size_t from, std::size_t to) const {
    auto it = edge_frequency.find({from, to});
    return it == edge_frequency.end() ? 0.0 : it->second;
}

double EnsembleGraph::combined_frequency(std::size_t a, std::size_t b) const {
    return directed_frequency(a, b) + directed_frequency(b, a);
}

EnsembleGraph bootstrap_consensus(const DataMatrix& data, const Constraints& constraints, const BootstrapConfig& config) {
    return bootstrap_consensus(data, constraints, config, nullptr);
}

EnsembleGraph bootstrap_consensus(const DataMatrix& data, const Constraints& constraints,
                                  const BootstrapConfig& config, std::vector<ScoredGraph>* replicates_out) {
    if (config.n_boot < 1) throw Error(ErrorKind::invalid_config, "n_boot must be at least 1");
    if (!(config.threshold > 0.0 && config.threshold <= 1.0))
        throw Error(ErrorKind::invalid_config, "threshold must lie in (0, 1]");
    // Fail on bad constraints before spawning work.
    resolve_rules(data, constraints, config.search.max_in_degree);

    const std::size_t n = static_cast<std::size_t>(data.cols());
    const Eigen::Index s = data.rows();
    std::vector<ScoredGraph> replicates(config.n_boot);
    parallel_for(config.n_boot, config.threads, [&](std::size_t b) {
        Rng rng = make_rng(config.seed, "bootstrap", b);
        std::uniform_int_distribution<Eigen::Index> row(0, s - 1);
        std::vector<Eigen::Index> rows(static_cast<std::size_t>(s));
        for (auto& r : rows) r = row(rng);
        SearchConfig search = config.search;
        search.seed = derive_seed(config.seed, "search", b);
        replicates[b] = hill_climb(data.take_rows(rows), constraints, search);
    });

    std::vector<std::size_t> count(n * n, 0);
    for (const auto& rep : replicates) {
        for (const auto& e : rep.dag.edges()) ++count[e.from * n + e.to];
    }

    EnsembleGraph out;
    out.threshold = config.threshold;
    out.n_boot = config.n_boot;
    const double denom = static_cast<double>(config.n_boot);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (count[i * n + j] > 0) out.edge_frequency[{i, j}] = static_cast<double>(count[i * n + j]) / denom;
        }
    }

    const double needed = config.threshold * denom - 1e-9;
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const std::size_t ab = count[a * n + b];
            const std::size_t ba = count[b * n + a];
            if (static_cast<double>(ab + ba) < needed) continue;
            edges.push_back(ab >= ba ? Edge{a, b} : Edge{b, a});
        }
    }

    // Break cycles by dropping the least supported edge on each cycle found.
    const auto names = data.names();
    auto support = [&](const Edge& e) { return count[e.from * n + e.to] + count[e.to * n + e.from]; };
    while (true) {
        try {
            topological_order(names, edges);
            break;
        } catch (const CycleError& err) {
            const auto& cyc = err.cycle();
            auto weakest = edges.end();
            for (std::size_t k = 0; k < cyc.size(); ++k) {
                const Edge e{data.index(cyc[k]), data.index(cyc[(k + 1) % cyc.size()])};
                auto it = std::find(edges.begin(), edges.end(), e);
                if (it == edges.end()) continue;
                if (weakest == edges.end() || support(*it) < support(*weakest) ||
                    (support(*it) == support(*weakest) && *weakest < *it))
                    weakest = it;
            }
            edges.erase(weakest);
        }
    }
    out.consensus_dag = Dag(names, data.roles(), edges);

    const Dag& dag = out.consensus_dag;
    std::vector<NodeModel> params(n);
    const Eigen::VectorXd means = data.values().colwise().mean();
    for (std::size_t j = 0; j < n; ++j) {
        auto& p = params[j];
        double sd_sum = 0.0;
        for (const auto& rep : replicates) sd_sum += rep.sem.params(j).noise_sd;
        p.noise_sd = sd_sum / denom;
        p.intercept = means(static_cast<Eigen::Index>(j));
        for (std::size_t parent : dag.parents(j)) {
            double sum = 0.0;
            std::size_t hits = 0;
            for (const auto& rep : replicates) {
                if (rep.dag.has_edge(parent, j)) {
                    sum += rep.sem.coefficient(parent, j);
                    ++hits;
                }
            }
            const double coeff = hits ? sum / static_cast<double>(hits) : 0.0;
            p.coeffs.push_back(coeff);
            p.intercept -= coeff * means(static_cast<Eigen::Index>(parent));
        }
    }
    out.averaged_sem = LinearSem(dag, std::move(params));
    if (replicates_out) *replicates_out = std::move(replicates);
    return out;
}

}  // namespace latentdag
