#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "causalmb/errors.hpp"
#include "causalmb/identification.hpp"

namespace causalmb::oracle {

namespace {

// Edge in a path, as seen while walking it: the far endpoint and whether the
// edge carries an arrowhead at the near/far ends.
struct Step {
    int to;
    bool head_at_from;
    bool head_at_to;
};

std::vector<Step> steps_from(const Smcm& g, int u) {
    std::vector<Step> out;
    for (int c : g.children(u)) out.push_back({c, false, true});
    for (int p : g.parents(u)) out.push_back({p, true, false});
    for (int s : g.siblings(u)) out.push_back({s, true, true});
    return out;
}

NodeSet ancestors_or_self(const Smcm& g, const NodeSet& s) {
    NodeSet out = s;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < g.n(); ++v) {
            if (out.contains(v)) continue;
            for (int c : g.children(v)) {
                if (out.contains(c)) {
                    out.insert(v);
                    changed = true;
                    break;
                }
            }
        }
    }
    return out;
}

}  // namespace

bool msep_by_path_enumeration(const Smcm& g, const NodeSet& a, const NodeSet& b, const NodeSet& z) {
    const NodeSet collider_pass = ancestors_or_self(g, z);
    bool connected = false;

    // DFS over simple paths; when extending past a node its junction type is
    // known, so blocked prefixes are pruned immediately.
    std::vector<uint8_t> on_path(g.n(), 0);
    std::function<void(int, bool)> dfs = [&](int u, bool arrived_head) {
        if (connected) return;
        for (const Step& s : steps_from(g, u)) {
            if (on_path[s.to]) continue;
            // u is an intermediate between the previous edge and this one.
            const bool collider = arrived_head && s.head_at_from;
            if (collider ? !collider_pass.contains(u) : z.contains(u)) continue;
            if (b.contains(s.to)) {
                connected = true;
                return;
            }
            if (a.contains(s.to)) continue;  // restart from that source instead
            on_path[s.to] = 1;
            dfs(s.to, s.head_at_to);
            on_path[s.to] = 0;
        }
    };

    // The first hop has no junction at its source.
    for (int src : a.to_vector()) {
        std::fill(on_path.begin(), on_path.end(), 0);
        on_path[src] = 1;
        for (const Step& s : steps_from(g, src)) {
            if (b.contains(s.to)) return false;
            if (a.contains(s.to)) continue;  // explored from that source instead
            on_path[s.to] = 1;
            dfs(s.to, s.head_at_to);
            on_path[s.to] = 0;
            if (connected) return false;
        }
    }
    return !connected;
}

namespace {

Smcm drop_outgoing(const Smcm& g, int x) {
    std::vector<std::pair<std::string, std::string>> directed, bidirected;
    for (auto [u, v] : g.directed_edges())
        if (u != x) directed.emplace_back(g.name(u), g.name(v));
    for (auto [u, v] : g.bidirected_edges()) bidirected.emplace_back(g.name(u), g.name(v));
    return Smcm::make(g.names(), directed, bidirected);
}

Smcm drop_incoming(const Smcm& g, int x) {
    std::vector<std::pair<std::string, std::string>> directed, bidirected;
    for (auto [u, v] : g.directed_edges())
        if (v != x) directed.emplace_back(g.name(u), g.name(v));
    for (auto [u, v] : g.bidirected_edges())
        if (u != x && v != x) bidirected.emplace_back(g.name(u), g.name(v));
    return Smcm::make(g.names(), directed, bidirected);
}

std::vector<int> covariates_of(const Smcm& g, int x, int y) {
    std::vector<int> out;
    for (int v = 0; v < g.n(); ++v)
        if (v != x && v != y) out.push_back(v);
    return out;
}

NodeSet pick(int universe, const std::vector<int>& pool, uint32_t mask) {
    NodeSet s(universe);
    for (size_t i = 0; i < pool.size(); ++i)
        if (mask & (1u << i)) s.insert(pool[i]);
    return s;
}

}  // namespace

bool identifiable_by_extension_search(const Smcm& g, int x, int y, const NodeSet& w) {
    const Smcm gu = drop_outgoing(g, x);
    const NodeSet xs = NodeSet::of(g.n(), {x});
    const NodeSet ys = NodeSet::of(g.n(), {y});
    std::vector<int> rest;
    for (int v : covariates_of(g, x, y))
        if (!w.contains(v)) rest.push_back(v);
    const uint32_t total = 1u << rest.size();
    for (uint32_t mask = 0; mask < total; ++mask) {
        NodeSet ext = w;
        ext |= pick(g.n(), rest, mask);
        if (m_separated(gu, xs, ys, ext)) return true;
    }
    return false;
}

bool cmb_by_definition(const Smcm& g, int x, int y, const NodeSet& w) {
    const Smcm gm = drop_incoming(g, x);
    const NodeSet ys = NodeSet::of(g.n(), {y});

    // (1) identifiability of P(y | do(x), w)
    if (!identifiable_by_extension_search(g, x, y, w)) return false;

    NodeSet xw = w;
    xw.insert(x);

    // (2) every nonempty disjoint extension is redundant or non-identifiable
    std::vector<int> rest;
    for (int v : covariates_of(g, x, y))
        if (!w.contains(v)) rest.push_back(v);
    const uint32_t ext_total = 1u << rest.size();
    for (uint32_t mask = 1; mask < ext_total; ++mask) {
        const NodeSet w_prime = pick(g.n(), rest, mask);
        if (m_separated(gm, ys, w_prime, xw)) continue;
        NodeSet w_ext = w;
        w_ext |= w_prime;
        if (!identifiable_by_extension_search(g, x, y, w_ext)) continue;
        return false;
    }

    // (3) every proper subset loses information
    const std::vector<int> wm = w.to_vector();
    const uint32_t w_total = 1u << wm.size();
    for (uint32_t mask = 0; mask + 1 < w_total; ++mask) {
        const NodeSet kept = pick(g.n(), wm, mask);
        NodeSet dropped = w;
        dropped -= kept;
        NodeSet x_kept = kept;
        x_kept.insert(x);
        if (m_separated(gm, ys, dropped, x_kept)) return false;
    }
    return true;
}

std::vector<NodeSet> enumerate_cmbs_by_definition(const Smcm& g, int x, int y) {
    std::vector<NodeSet> out;
    const std::vector<int> pool = covariates_of(g, x, y);
    const uint32_t total = 1u << pool.size();
    for (uint32_t mask = 0; mask < total; ++mask) {
        const NodeSet w = pick(g.n(), pool, mask);
        if (cmb_by_definition(g, x, y, w)) {
            NodeSet z = w;
            z.insert(x);
            out.push_back(z);
        }
    }
    std::sort(out.begin(), out.end(), [](const NodeSet& a, const NodeSet& b) {
        if (a.count() != b.count()) return a.count() < b.count();
        return a.to_vector() < b.to_vector();
    });
    return out;
}

namespace {

// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>* nodes, std::vector<double>* weights) {
    nodes->resize(n);
    weights->resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        (*nodes)[i] = 0.5 * (1.0 - x);  // map [-1,1] -> [0,1], mirrored is fine
        (*weights)[i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
}

double dirichlet_log_norm(const std::vector<double>& a) {
    double sum = 0.0, lg = 0.0;
    for (double ai : a) {
        sum += ai;
        lg += std::lgamma(ai);
    }
    return lg - std::lgamma(sum);  // log B(a)
}

}  // namespace

double log_marginal_likelihood_by_quadrature(const CountTable& t,
                                             const std::vector<double>& alpha_cells) {
    const int r = t.outcome_arity();
    if (r != 2 && r != 3) throw validation_error("quadrature oracle supports arities 2 and 3");
    static std::vector<double> nodes, weights;
    if (nodes.empty()) gauss_legendre(64, &nodes, &weights);

    double total = 0.0;
    t.for_each_nonzero([&](uint64_t j, const int64_t* row, int64_t) {
        std::vector<double> a(r);
        for (int k = 0; k < r; ++k) a[k] = alpha_cells[j * r + k];
        const double log_b = dirichlet_log_norm(a);
        double integral = 0.0;
        if (r == 2) {
            for (size_t i = 0; i < nodes.size(); ++i) {
                const double t0 = nodes[i];
                const double t1 = 1.0 - t0;
                integral += weights[i] * std::pow(t0, static_cast<double>(row[0]) + a[0] - 1.0) *
                            std::pow(t1, static_cast<double>(row[1]) + a[1] - 1.0);
            }
        } else {
            for (size_t i = 0; i < nodes.size(); ++i) {
                const double t0 = nodes[i];
                double inner = 0.0;
                for (size_t m = 0; m < nodes.size(); ++m) {
                    const double t1 = (1.0 - t0) * nodes[m];
                    const double t2 = 1.0 - t0 - t1;
                    inner += weights[m] * (1.0 - t0) *
                             std::pow(t1, static_cast<double>(row[1]) + a[1] - 1.0) *
                             std::pow(t2, static_cast<double>(row[2]) + a[2] - 1.0);
                }
                integral += weights[i] * std::pow(t0, static_cast<double>(row[0]) + a[0] - 1.0) * inner;
            }
        }
        total += std::log(integral) - log_b;
    });
    return total;
}

double log_marginal_likelihood_by_monte_carlo(const CountTable& t, double alpha, int draws,
                                              uint64_t seed) {
    const int r = t.outcome_arity();
    Rng rng(seed);
    double total = 0.0;
    t.for_each_nonzero([&](uint64_t, const int64_t* row, int64_t) {
        double mean = 0.0;
        for (int d = 0; d < draws; ++d) {
            // Dirichlet(alpha) via gamma spacings; alpha = 1 uses the flat
            // sampler, otherwise sum of -log(u) terms approximates only for
            // integer alpha, so keep tests at alpha = 1.
            std::vector<double> theta = rng.dirichlet_flat(r);
            double like = 1.0;
            for (int k = 0; k < r; ++k) like *= std::pow(theta[k], static_cast<double>(row[k]));
            mean += like;
        }
        (void)alpha;
        total += std::log(mean / draws);
    });
    return total;
}

double log_marginal_likelihood_prequential(const DiscreteDataset& d, int y,
                                           const std::vector<int>& z, double alpha) {
    const int r = d.variable(y).arity;
    std::map<std::vector<int>, std::vector<int64_t>> counts;
    double total = 0.0;
    for (int64_t row = 0; row < d.n_rows(); ++row) {
        std::vector<int> config;
        for (int zi : z) config.push_back(d.at(row, zi));
        auto& cell = counts[config];
        if (cell.empty()) cell.assign(r, 0);
        int64_t nj = 0;
        for (int64_t c : cell) nj += c;
        const int k = d.at(row, y);
        total += std::log((static_cast<double>(cell[k]) + alpha) /
                          (static_cast<double>(nj) + alpha * r));
        ++cell[k];
    }
    return total;
}

double posterior_by_enumeration(const DiscreteBayesNet& net, int y, int y_val,
                                const std::map<int, int>& evidence,
                                const std::optional<std::pair<int, int>>& do_assignment) {
    const int n = net.n();
    std::vector<int> assignment(n, 0);
    double numer = 0.0, denom = 0.0;
    std::function<void(int, double)> recurse = [&](int v, double p) {
        if (p == 0.0) return;
        if (v == n) {
            denom += p;
            if (assignment[y] == y_val) numer += p;
            return;
        }
        if (do_assignment && v == do_assignment->first) {
            assignment[v] = do_assignment->second;
            recurse(v + 1, p);  // intervened mechanism contributes no factor
            return;
        }
        auto ev = evidence.find(v);
        const auto& cpt_row = [&]() -> const std::vector<double>& {
            return net.cpt_row(v, net.parent_config(v, assignment));
        };
        if (ev != evidence.end()) {
            assignment[v] = ev->second;
            recurse(v + 1, p * cpt_row()[ev->second]);
            return;
        }
        for (int val = 0; val < net.arity(v); ++val) {
            assignment[v] = val;
            recurse(v + 1, p * cpt_row()[val]);
        }
    };
    recurse(0, 1.0);
    if (denom <= 0.0) throw zero_evidence_error("evidence has probability zero");
    return numer / denom;
}

double auc_by_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    int64_t pairs = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return pairs == 0 ? 0.5 : wins / static_cast<double>(pairs);
}

double signed_rank_by_permutation(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> diffs;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    const size_t n = diffs.size();
    if (n == 0) return 1.0;
    if (n > 20) throw validation_error("permutation oracle limited to 20 informative pairs");

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return std::abs(diffs[i]) < std::abs(diffs[j]); });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k) ranks[order[k]] = midrank;
        i = j;
    }
    double observed = 0.0;
    for (size_t k = 0; k < n; ++k)
        if (diffs[k] > 0.0) observed += ranks[k];

    int64_t at_most = 0;
    const uint32_t total = 1u << n;
    for (uint32_t mask = 0; mask < total; ++mask) {
        double w = 0.0;
        for (size_t k = 0; k < n; ++k)
            if (mask & (1u << k)) w += ranks[k];
        if (w <= observed + 1e-12) ++at_most;
    }
    return static_cast<double>(at_most) / static_cast<double>(total);
}

Smcm random_smcm(int n_cov, double p_directed, double p_bidirected, double p_xy_bidirected,
                 Rng& rng) {
    std::vector<std::string> names;
    for (int i = 0; i < n_cov; ++i) names.push_back("V" + std::to_string(i + 1));
    names.push_back("X");
    names.push_back("Y");
    const int x = n_cov, y = n_cov + 1;

    std::vector<std::pair<std::string, std::string>> directed, bidirected;
    for (int v = 1; v < n_cov; ++v)
        for (int u = 0; u < v; ++u)
            if (rng.next_double() < p_directed) directed.emplace_back(names[u], names[v]);
    for (int u = 0; u < n_cov; ++u) {
        if (rng.next_double() < p_directed) directed.emplace_back(names[u], names[x]);
        if (rng.next_double() < p_directed) directed.emplace_back(names[u], names[y]);
    }
    directed.emplace_back(names[x], names[y]);

    for (int u = 0; u < n_cov + 2; ++u) {
        for (int v = u + 1; v < n_cov + 2; ++v) {
            const bool is_xy = (u == x && v == y);
            const double p = is_xy ? p_xy_bidirected : p_bidirected;
            if (rng.next_double() < p) bidirected.emplace_back(names[u], names[v]);
        }
    }
    return Smcm::make(names, directed, bidirected, "X", "Y");
}

}  // namespace causalmb::oracle
