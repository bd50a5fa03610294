#include "causalmb/identification.hpp"

#include <algorithm>
#include <deque>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "causalmb/errors.hpp"

namespace causalmb {

namespace {

void check_xy(const Smcm& g, int x, int y) {
    if (x < 0 || x >= g.n() || y < 0 || y >= g.n()) throw validation_error("node index out of range");
    if (x == y) throw validation_error("treatment and outcome must differ");
}

// Subsets of `members` in increasing mask order; mask order is the canonical
// enumeration order everywhere so parallel evaluation stays deterministic.
std::vector<int> set_members(const NodeSet& s) { return s.to_vector(); }

NodeSet subset_from_mask(int universe, const std::vector<int>& members, uint32_t mask) {
    NodeSet s(universe);
    for (size_t i = 0; i < members.size(); ++i)
        if (mask & (1u << i)) s.insert(members[i]);
    return s;
}

struct CmbContext {
    const Smcm& g;
    Smcm g_underlined;  // outgoing edges of x removed
    Smcm g_overlined;   // incoming edges of x removed
    NodeSet mb;         // Markov boundary of y in g
    int x, y;
};

CmbContext make_context(const Smcm& g, int x, int y) {
    return CmbContext{g, remove_outgoing(g, x), remove_incoming(g, x), observational_mb(g, y), x, y};
}

CmbReport evaluate_cmb(const CmbContext& ctx, const NodeSet& z) {
    if (!z.contains(ctx.x)) throw validation_error("candidate must contain the treatment");
    if (z.contains(ctx.y)) throw validation_error("candidate must not contain the outcome");

    CmbReport report;
    report.candidate = z;

    NodeSet w = z;
    w.erase(ctx.x);
    const NodeSet x_only = NodeSet::of(ctx.g.n(), {ctx.x});
    const NodeSet y_only = NodeSet::of(ctx.g.n(), {ctx.y});

    // (1) w must block every backdoor path.
    if (!m_separated(ctx.g_underlined, x_only, y_only, w)) {
        report.failed_condition = CmbFailure::not_identifiable;
        return report;
    }

    NodeSet xw = w;
    xw.insert(ctx.x);

    // (2) Extensions are drawn from the Markov boundary: any covariate that
    // stays relevant for y given xw has a witness inside MB(y), so the
    // quantifier over all extensions reduces to this set.
    NodeSet ext_pool = ctx.mb;
    ext_pool -= z;
    ext_pool.erase(ctx.y);
    const std::vector<int> ext = set_members(ext_pool);
    const uint32_t ext_count = 1u << ext.size();
    for (uint32_t mask = 1; mask < ext_count; ++mask) {
        NodeSet w_prime = subset_from_mask(ctx.g.n(), ext, mask);
        if (m_separated(ctx.g_overlined, y_only, w_prime, xw)) continue;  // redundant extension
        NodeSet w_ext = w;
        w_ext |= w_prime;
        if (!is_subset_of_backdoor(ctx.g, ctx.x, ctx.y, w_ext)) continue;  // extension kills identifiability
        report.failed_condition = CmbFailure::redundant_or_identifiable_superset;
        report.witness = w_prime;
        return report;
    }

    // (3) Dropping any part of w must lose information about y.
    const std::vector<int> wm = set_members(w);
    const uint32_t w_count = 1u << wm.size();
    for (uint32_t mask = 0; mask + 1 < w_count; ++mask) {
        NodeSet kept = subset_from_mask(ctx.g.n(), wm, mask);
        NodeSet dropped = w;
        dropped -= kept;
        NodeSet x_kept = kept;
        x_kept.insert(ctx.x);
        if (m_separated(ctx.g_overlined, y_only, dropped, x_kept)) {
            report.failed_condition = CmbFailure::not_minimal;
            report.witness = kept;
            return report;
        }
    }

    report.is_cmb = true;
    return report;
}

}  // namespace

bool is_backdoor_set(const Smcm& g, int x, int y, const NodeSet& w) {
    check_xy(g, x, y);
    if (w.contains(x) || w.contains(y)) throw validation_error("backdoor set must exclude treatment and outcome");
    return m_separated(remove_outgoing(g, x), NodeSet::of(g.n(), {x}), NodeSet::of(g.n(), {y}), w);
}

bool is_subset_of_backdoor(const Smcm& g, int x, int y, const NodeSet& w) {
    check_xy(g, x, y);
    if (w.contains(x) || w.contains(y)) throw validation_error("covariate set must exclude treatment and outcome");
    // Intermediates must have a descendant in w or y, i.e. be ancestors of
    // w or y (a node is its own descendant).
    NodeSet targets = w;
    targets.insert(y);
    const NodeSet allowed = ancestors(g, targets);

    NodeSet visited = NodeSet::of(g.n(), {x});
    std::deque<int> q{x};
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int s : g.siblings(u)) {
            if (s == y) return false;  // bad bidirected path exists
            if (!visited.contains(s) && allowed.contains(s)) {
                visited.insert(s);
                q.push_back(s);
            }
        }
    }
    return true;
}

NodeSet interventional_mb(const Smcm& g, int x, int y) {
    check_xy(g, x, y);
    return observational_mb(remove_incoming(g, x), y);
}

CmbReport is_cmb(const Smcm& g, int x, int y, const NodeSet& z) {
    check_xy(g, x, y);
    return evaluate_cmb(make_context(g, x, y), z);
}

std::vector<NodeSet> enumerate_cmbs(const Smcm& g, int x, int y) {
    check_xy(g, x, y);
    const CmbContext ctx = make_context(g, x, y);

    NodeSet pool = ctx.mb;
    pool.erase(x);
    if (ctx.mb.count() > kEnumerateCmbCap)
        throw capacity_error("Markov boundary larger than the enumeration cap of " +
                             std::to_string(kEnumerateCmbCap) + " nodes");
    const std::vector<int> members = set_members(pool);
    const uint32_t total = 1u << members.size();

    std::vector<uint8_t> accepted(total, 0);
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t mask = 0; mask < static_cast<int64_t>(total); ++mask) {
        NodeSet z = subset_from_mask(g.n(), members, static_cast<uint32_t>(mask));
        z.insert(x);
        if (evaluate_cmb(ctx, z).is_cmb) accepted[mask] = 1;
    }

    std::vector<NodeSet> out;
    for (uint32_t mask = 0; mask < total; ++mask) {
        if (accepted[mask]) {
            NodeSet z = subset_from_mask(g.n(), members, mask);
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

Smcm latent_project(const Smcm& g) {
    const int n = g.n();
    const NodeSet& lat = g.latent();
    if (lat.empty()) return g;

    std::vector<int> old_to_new(n, -1);
    std::vector<std::string> names;
    for (int v = 0; v < n; ++v) {
        if (!lat.contains(v)) {
            old_to_new[v] = static_cast<int>(names.size());
            names.push_back(g.name(v));
        }
    }

    std::vector<std::pair<std::string, std::string>> directed, bidirected;

    // From each observed source, walk paths whose intermediates are latent
    // non-colliders, split by the edge end at the source (tail -> candidate
    // directed edge, head -> candidate bidirected edge).
    enum Mark { kTail = 0, kHead = 1 };
    for (int u = 0; u < n; ++u) {
        if (lat.contains(u)) continue;
        for (int src_head = 0; src_head <= 1; ++src_head) {
            std::vector<uint8_t> visited(static_cast<size_t>(n) * 2, 0);
            std::deque<std::pair<int, Mark>> q;
            std::vector<uint8_t> hit(n, 0);

            auto arrive = [&](int v, Mark m) {
                if (!lat.contains(v)) {
                    if (v != u && m == kHead) hit[v] = 1;
                    return;  // observed nodes terminate the walk
                }
                size_t key = static_cast<size_t>(v) * 2 + m;
                if (!visited[key]) {
                    visited[key] = 1;
                    q.emplace_back(v, m);
                }
            };

            if (src_head == 0) {
                for (int c : g.children(u)) arrive(c, kHead);
            } else {
                for (int p : g.parents(u)) arrive(p, kTail);
                for (int s : g.siblings(u)) arrive(s, kHead);
            }
            while (!q.empty()) {
                auto [v, m] = q.front();
                q.pop_front();
                // Latent intermediates must be non-colliders: arriving by a
                // head forbids leaving by a head.
                for (int c : g.children(v)) arrive(c, kHead);
                if (m == kTail) {
                    for (int p : g.parents(v)) arrive(p, kTail);
                    for (int s : g.siblings(v)) arrive(s, kHead);
                }
            }
            for (int v = 0; v < n; ++v) {
                if (!hit[v]) continue;
                if (src_head == 0) {
                    directed.emplace_back(g.name(u), g.name(v));
                } else if (u < v) {  // record each bidirected pair once
                    bidirected.emplace_back(g.name(u), g.name(v));
                }
            }
        }
    }

    std::optional<std::string> treatment, outcome;
    if (g.treatment()) treatment = g.name(*g.treatment());
    if (g.outcome()) outcome = g.name(*g.outcome());
    return Smcm::make(names, directed, bidirected, treatment, outcome);
}

}  // namespace causalmb
