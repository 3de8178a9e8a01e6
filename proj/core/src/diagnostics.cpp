#include <latentdag/diagnostics.hpp>
#include <latentdag/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace latentdag {

double coefficient_rmse(const LinearSem& estimated, const GroundTruth& truth, RmseScope scope) {
    if (truth.outcome_names.empty()) throw Error(ErrorKind::no_outcome_nodes, "ground truth declares no outcomes");
    const Dag& est = estimated.dag();
    const Dag& tru = truth.sem.dag();
    double sum = 0.0;
    std::size_t terms = 0;
    auto accumulate = [&](double e, double t) {
        sum += (e - t) * (e - t);
        ++terms;
    };
    for (const auto& outcome : truth.outcome_names) {
        const auto est_o = est.find(outcome);
        if (!est_o) throw Error(ErrorKind::node_set_mismatch, "outcome '" + outcome + "' missing from estimate");
        const std::size_t tru_o = tru.index(outcome);
        if (scope == RmseScope::true_drivers) {
            for (std::size_t p : tru.parents(tru_o)) {
                const auto& name = tru.name(p);
                if (truth.is_latent(name)) continue;
                const auto est_p = est.find(name);
                const double e = est_p ? estimated.coefficient(*est_p, *est_o) : 0.0;
                accumulate(e, truth.sem.coefficient(p, tru_o));
            }
        } else {
            for (std::size_t p = 0; p < est.size(); ++p) {
                if (p == *est_o) continue;
                const auto tru_p = tru.find(est.name(p));
                if (!tru_p) continue;
                const bool in_est = est.has_edge(p, *est_o);
                const bool in_tru = tru.has_edge(*tru_p, tru_o);
                if (!in_est && !in_tru) continue;
                accumulate(in_est ? estimated.coefficient(p, *est_o) : 0.0,
                           in_tru ? truth.sem.coefficient(*tru_p, tru_o) : 0.0);
            }
        }
    }
    return terms ? std::sqrt(sum / static_cast<double>(terms)) : 0.0;
}

double coefficient_rmse(const EnsembleGraph& estimated, const GroundTruth& truth, RmseScope scope) {
    return coefficient_rmse(estimated.averaged_sem, truth, scope);
}

namespace {

// R^2 of y on [1, x]; nullopt when the design is rank deficient or y is constant.
std::optional<double> r_squared(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    const double tss = (y.array() - y.mean()).square().sum();
    if (!(tss > 0.0)) return std::nullopt;
    Eigen::MatrixXd design(y.size(), x.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) return std::nullopt;
    const double rss = (y - design * qr.solve(y)).squaredNorm();
    return 1.0 - rss / tss;
}

}  // namespace

std::map<std::string, double> latent_r2(const std::map<std::string, Eigen::VectorXd>& true_latents,
                                        const Eigen::MatrixXd& scores) {
    const auto s = static_cast<double>(scores.rows());
    const auto q = static_cast<double>(scores.cols());
    if (scores.cols() < 1) throw Error(ErrorKind::degenerate_input, "latent estimate has no columns");
    if (s <= q + 1) throw Error(ErrorKind::degenerate_input, "too few samples for adjusted R^2");
    std::map<std::string, double> out;
    for (const auto& [name, u] : true_latents) {
        if (u.size() != scores.rows()) throw Error(ErrorKind::shape_mismatch, "latent '" + name + "' has wrong length");
        const auto r2 = r_squared(u, scores);
        if (!r2) throw Error(ErrorKind::degenerate_input, "cannot regress latent '" + name + "' on the estimate");
        out[name] = 1.0 - (1.0 - *r2) * (s - 1.0) / (s - q - 1.0);
    }
    return out;
}

std::map<std::string, double> latent_r2(const std::map<std::string, Eigen::VectorXd>& true_latents,
                                        const LatentEstimate& estimate) {
    return latent_r2(true_latents, estimate.scores);
}

double vif(const DataMatrix& data, std::string_view outcome, const std::vector<std::string>& parent_set,
           std::string_view target_parent) {
    data.index(outcome);
    if (std::find(parent_set.begin(), parent_set.end(), target_parent) == parent_set.end())
        throw Error(ErrorKind::invalid_config, "target parent is not in the parent set");
    if (parent_set.size() == 1) return 1.0;
    Eigen::MatrixXd others(data.rows(), static_cast<Eigen::Index>(parent_set.size() - 1));
    Eigen::Index k = 0;
    for (const auto& p : parent_set) {
        if (p != target_parent) others.col(k++) = data.column(p);
    }
    const auto r2 = r_squared(data.column(target_parent), others);
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!r2 || 1.0 - *r2 <= 1e-12) return inf;
    return 1.0 / (1.0 - *r2);
}

CapRecord improvement_cap(double confounded_score, double final_score, const GroundTruth& truth,
                          const Dag& confounded_graph, std::size_t n_samples) {
    if (!std::isfinite(confounded_score) || !std::isfinite(final_score))
        throw Error(ErrorKind::non_comparable_scores, "scores must be finite");
    if (truth.outcome_names.empty()) throw Error(ErrorKind::no_outcome_nodes, "ground truth declares no outcomes");
    const Dag& tru = truth.sem.dag();
    std::set<std::string> adjacent;
    for (const auto& l : truth.latent_names) {
        const std::size_t li = tru.index(l);
        for (std::size_t c : tru.children(li)) adjacent.insert(tru.name(c));
        for (std::size_t p : tru.parents(li)) adjacent.insert(tru.name(p));
    }
    for (const auto& l : truth.latent_names) adjacent.erase(l);

    CapRecord rec;
    rec.evaluable = true;
    for (const auto& outcome : truth.outcome_names) {
        std::set<std::string> w;
        for (const auto& p : markov_parents(confounded_graph, outcome)) w.insert(p);
        double missing = 0.0;
        for (const auto& x : adjacent) {
            if (x != outcome && !w.count(x)) missing += 1.0;
        }
        rec.k += missing - static_cast<double>(truth.latent_names.size());
    }
    rec.lhs = confounded_score - final_score;
    rec.bound = rec.k * std::log(static_cast<double>(n_samples));
    rec.satisfied = rec.lhs <= rec.bound;
    return rec;
}

StructuralMetrics structural_metrics(const Dag& estimated, const Dag& truth,
                                     const std::vector<std::string>& latent_names) {
    auto keep_est = [&](std::size_t i) { return estimated.role(i) != NodeRole::latent_estimate; };
    auto keep_tru = [&](std::size_t i) {
        return std::find(latent_names.begin(), latent_names.end(), truth.name(i)) == latent_names.end();
    };
    std::set<std::string> est_nodes, tru_nodes;
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        if (keep_est(i)) est_nodes.insert(estimated.name(i));
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (keep_tru(i)) tru_nodes.insert(truth.name(i));
    }
    if (est_nodes != tru_nodes) throw Error(ErrorKind::node_set_mismatch, "estimated and true node sets differ");

    using NamePair = std::pair<std::string, std::string>;
    std::set<NamePair> est_dir, tru_dir, est_skel, tru_skel;
    auto skel = [](const std::string& a, const std::string& b) { return a < b ? NamePair{a, b} : NamePair{b, a}; };
    for (const auto& e : estimated.edges()) {
        if (!keep_est(e.from) || !keep_est(e.to)) continue;
        est_dir.insert({estimated.name(e.from), estimated.name(e.to)});
        est_skel.insert(skel(estimated.name(e.from), estimated.name(e.to)));
    }
    for (const auto& e : truth.edges()) {
        if (!keep_tru(e.from) || !keep_tru(e.to)) continue;
        tru_dir.insert({truth.name(e.from), truth.name(e.to)});
        tru_skel.insert(skel(truth.name(e.from), truth.name(e.to)));
    }

    StructuralMetrics m;
    for (const auto& e : est_dir) (tru_dir.count(e) ? m.true_positive : m.false_positive)++;
    for (const auto& e : tru_dir) {
        if (!est_dir.count(e)) ++m.false_negative;
    }
    for (const auto& e : est_skel) (tru_skel.count(e) ? m.skeleton_true_positive : m.skeleton_false_positive)++;
    for (const auto& e : tru_skel) {
        if (!est_skel.count(e)) ++m.skeleton_false_negative;
    }
    const double tp = static_cast<double>(m.skeleton_true_positive);
    m.skeleton_precision = est_skel.empty() ? 1.0 : tp / static_cast<double>(est_skel.size());
    m.skeleton_recall = tru_skel.empty() ? 1.0 : tp / static_cast<double>(tru_skel.size());
    const double denom = m.skeleton_precision + m.skeleton_recall;
    m.skeleton_f1 = denom > 0.0 ? 2.0 * m.skeleton_precision * m.skeleton_recall / denom : 0.0;
    return m;
}

std::size_t false_positive_parents(const Dag& estimated, const GroundTruth& truth, std::string_view outcome) {
    const Dag& tru = truth.sem.dag();
    const std::size_t o = estimated.index(outcome);
    const std::size_t to = tru.index(outcome);
    std::size_t count = 0;
    for (std::size_t p : estimated.parents(o)) {
        if (estimated.role(p) == NodeRole::latent_estimate) continue;
        const auto tp = tru.find(estimated.name(p));
        if (!tp || !tru.has_edge(*tp, to)) ++count;
    }
    return count;
}

double mean_outcome_vif(const DataMatrix& data, const Dag& dag) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < dag.size(); ++j) {
        if (dag.role(j) != NodeRole::outcome) continue;
        const auto parents = markov_parents(dag, dag.name(j));
        for (const auto& p : parents) {
            sum += vif(data, dag.name(j), parents, p);
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 1.0;
}

std::vector<double> loess(const std::vector<double>& x, const std::vector<double>& y, double span) {
    if (x.size() != y.size()) throw Error(ErrorKind::shape_mismatch, "loess inputs differ in length");
    const std::size_t n = x.size();
    std::vector<double> out(n);
    if (n == 0) return out;
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))), 2, n);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) dist[j] = std::abs(x[j] - x[i]);
        std::vector<double> sorted = dist;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
        const double h = std::max(sorted[k - 1], 1e-12) * (1.0 + 1e-9);
        double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = dist[j] / h;
            if (u >= 1.0) continue;
            const double w = std::pow(1.0 - u * u * u, 3);
            sw += w;
            sx += w * x[j];
            sy += w * y[j];
            sxx += w * x[j] * x[j];
            sxy += w * x[j] * y[j];
        }
        const double mx = sx / sw;
        const double my = sy / sw;
        const double var = sxx / sw - mx * mx;
        const double slope = var > 1e-12 ? (sxy / sw - mx * my) / var : 0.0;
        out[i] = my + slope * (x[i] - mx);
    }
    return out;
}

}  // namespace latentdag
