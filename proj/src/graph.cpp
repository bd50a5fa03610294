#include "causalmb/graph.hpp"

#include <algorithm>
#include <deque>

#include "causalmb/errors.hpp"

namespace causalmb {

Smcm Smcm::make(std::vector<std::string> nodes,
                const std::vector<std::pair<std::string, std::string>>& directed,
                const std::vector<std::pair<std::string, std::string>>& bidirected,
                const std::optional<std::string>& treatment,
                const std::optional<std::string>& outcome,
                const std::vector<std::string>& latent) {
    Smcm g;
    g.names_ = std::move(nodes);
    for (int i = 0; i < static_cast<int>(g.names_.size()); ++i) {
        if (!g.index_.emplace(g.names_[i], i).second)
            throw validation_error("duplicate node name: " + g.names_[i]);
    }
    const int n = g.n();
    g.parents_.resize(n);
    g.children_.resize(n);
    g.siblings_.resize(n);
    g.latent_ = NodeSet(n);

    for (const auto& [pu, pv] : directed) {
        int u = g.index_of(pu), v = g.index_of(pv);
        if (u == v) throw validation_error("self-loop on " + pu);
        if (g.has_directed(u, v)) throw validation_error("duplicate directed edge " + pu + " -> " + pv);
        g.children_[u].push_back(v);
        g.parents_[v].push_back(u);
    }
    for (const auto& [pu, pv] : bidirected) {
        int u = g.index_of(pu), v = g.index_of(pv);
        if (u == v) throw validation_error("self-loop on " + pu);
        if (g.has_bidirected(u, v)) throw validation_error("duplicate bidirected edge " + pu + " <-> " + pv);
        g.siblings_[u].push_back(v);
        g.siblings_[v].push_back(u);
    }
    for (int v = 0; v < n; ++v) {
        std::sort(g.parents_[v].begin(), g.parents_[v].end());
        std::sort(g.children_[v].begin(), g.children_[v].end());
        std::sort(g.siblings_[v].begin(), g.siblings_[v].end());
    }
    if (treatment) g.treatment_ = g.index_of(*treatment);
    if (outcome) g.outcome_ = g.index_of(*outcome);
    for (const auto& l : latent) g.latent_.insert(g.index_of(l));
    g.validate();
    return g;
}

Smcm::Smcm(Unchecked, std::vector<std::string> names, std::vector<std::vector<int>> parents,
           std::vector<std::vector<int>> children, std::vector<std::vector<int>> siblings,
           std::optional<int> treatment, std::optional<int> outcome, NodeSet latent)
    : names_(std::move(names)),
      parents_(std::move(parents)),
      children_(std::move(children)),
      siblings_(std::move(siblings)),
      treatment_(treatment),
      outcome_(outcome),
      latent_(std::move(latent)) {
    for (int i = 0; i < n(); ++i) index_.emplace(names_[i], i);
}

int Smcm::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw validation_error("unknown node: " + name);
    return it->second;
}

bool Smcm::has_directed(int u, int v) const {
    return std::binary_search(children_[u].begin(), children_[u].end(), v);
}

bool Smcm::has_bidirected(int u, int v) const {
    return std::binary_search(siblings_[u].begin(), siblings_[u].end(), v);
}

std::vector<std::pair<int, int>> Smcm::directed_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < n(); ++u)
        for (int v : children_[u]) out.emplace_back(u, v);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<int, int>> Smcm::bidirected_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < n(); ++u)
        for (int v : siblings_[u])
            if (u < v) out.emplace_back(u, v);
    std::sort(out.begin(), out.end());
    return out;
}

NodeSet Smcm::full_set() const {
    NodeSet s(n());
    for (int i = 0; i < n(); ++i) s.insert(i);
    return s;
}

void Smcm::validate() const {
    // Directed part must be acyclic (Kahn's algorithm).
    std::vector<int> indeg(n(), 0);
    for (int v = 0; v < n(); ++v) indeg[v] = static_cast<int>(parents_[v].size());
    std::deque<int> q;
    for (int v = 0; v < n(); ++v)
        if (indeg[v] == 0) q.push_back(v);
    int seen = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        ++seen;
        for (int c : children_[u])
            if (--indeg[c] == 0) q.push_back(c);
    }
    if (seen != n()) throw validation_error("directed part of the graph has a cycle");

    if (treatment_ && outcome_) {
        int x = *treatment_, y = *outcome_;
        if (x == y) throw validation_error("treatment and outcome must differ");
        if (!has_directed(x, y)) throw validation_error("treatment must have a directed edge into the outcome");
        NodeSet dx = descendants(*this, NodeSet::of(n(), {x}));
        dx.erase(x);
        dx.erase(y);
        if (!dx.empty())
            throw validation_error("covariates must be pre-treatment (non-descendants of the treatment)");
    }
    if (treatment_ && latent_.contains(*treatment_)) throw validation_error("treatment cannot be latent");
    if (outcome_ && latent_.contains(*outcome_)) throw validation_error("outcome cannot be latent");
}

NodeSet descendants(const Smcm& g, const NodeSet& s) {
    NodeSet out = s;
    std::deque<int> q;
    for (int v : s.to_vector()) q.push_back(v);
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int c : g.children(u)) {
            if (!out.contains(c)) {
                out.insert(c);
                q.push_back(c);
            }
        }
    }
    return out;
}

NodeSet ancestors(const Smcm& g, const NodeSet& s) {
    NodeSet out = s;
    std::deque<int> q;
    for (int v : s.to_vector()) q.push_back(v);
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int p : g.parents(u)) {
            if (!out.contains(p)) {
                out.insert(p);
                q.push_back(p);
            }
        }
    }
    return out;
}

NodeSet district(const Smcm& g, int y) {
    if (y < 0 || y >= g.n()) throw validation_error("node index out of range");
    NodeSet out = NodeSet::of(g.n(), {y});
    std::deque<int> q{y};
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int s : g.siblings(u)) {
            if (!out.contains(s)) {
                out.insert(s);
                q.push_back(s);
            }
        }
    }
    return out;
}

namespace {

Smcm copy_without(const Smcm& g, bool drop_directed_into_x, bool drop_bidirected_at_x,
                  bool drop_directed_out_of_x, int x) {
    const int n = g.n();
    std::vector<std::vector<int>> parents(n), children(n), siblings(n);
    for (int v = 0; v < n; ++v) {
        for (int c : g.children(v)) {
            if (drop_directed_into_x && c == x) continue;
            if (drop_directed_out_of_x && v == x) continue;
            children[v].push_back(c);
            parents[c].push_back(v);
        }
        for (int s : g.siblings(v)) {
            if (drop_bidirected_at_x && (v == x || s == x)) continue;
            siblings[v].push_back(s);
        }
    }
    for (int v = 0; v < n; ++v) std::sort(parents[v].begin(), parents[v].end());
    return Smcm(Smcm::Unchecked{}, g.names(), std::move(parents), std::move(children),
                std::move(siblings), g.treatment(), g.outcome(), g.latent());
}

}  // namespace

Smcm remove_incoming(const Smcm& g, int x) {
    if (x < 0 || x >= g.n()) throw validation_error("node index out of range");
    return copy_without(g, true, true, false, x);
}

Smcm remove_outgoing(const Smcm& g, int x) {
    if (x < 0 || x >= g.n()) throw validation_error("node index out of range");
    return copy_without(g, false, false, true, x);
}

bool m_separated(const Smcm& g, const NodeSet& a, const NodeSet& b, const NodeSet& z) {
    if (a.intersects(b) || a.intersects(z) || b.intersects(z))
        throw validation_error("m_separated requires pairwise disjoint node sets");
    if (a.empty() || b.empty()) return true;

    // Colliders pass when they are in z or have a descendant in z, i.e. when
    // they are ancestors of z.
    const NodeSet open_colliders = ancestors(g, z);

    // Reachability over (node, arrival mark) states. Mark records whether the
    // edge we arrived by has an arrowhead at this node. A junction at v with
    // arrival end `in_head` and departure end `out_head` is a collider iff
    // both are heads.
    const int n = g.n();
    std::vector<uint8_t> visited(static_cast<size_t>(n) * 2, 0);  // [node*2 + head?]
    std::deque<std::pair<int, bool>> q;                           // (node, arrived_by_head)

    auto arrive = [&](int v, bool head) {
        if (b.contains(v)) return true;
        size_t key = static_cast<size_t>(v) * 2 + (head ? 1 : 0);
        if (!visited[key]) {
            visited[key] = 1;
            q.emplace_back(v, head);
        }
        return false;
    };

    // First edge of a path has no junction constraint at its source.
    for (int s : a.to_vector()) {
        for (int c : g.children(s))
            if (arrive(c, true)) return false;
        for (int p : g.parents(s))
            if (arrive(p, false)) return false;
        for (int sib : g.siblings(s))
            if (arrive(sib, true)) return false;
    }

    while (!q.empty()) {
        auto [v, head] = q.front();
        q.pop_front();
        // Departures with a tail at v (v -> c): collider never; v must not be in z.
        bool tail_ok = !z.contains(v);
        // Departures with a head at v (v <- p or v <-> s): junction is a
        // collider iff we also arrived by a head.
        bool head_ok = head ? open_colliders.contains(v) : !z.contains(v);
        if (tail_ok) {
            for (int c : g.children(v))
                if (arrive(c, true)) return false;
        }
        if (head_ok) {
            for (int p : g.parents(v))
                if (arrive(p, false)) return false;
            for (int sib : g.siblings(v))
                if (arrive(sib, true)) return false;
        }
    }
    return true;
}

NodeSet observational_mb(const Smcm& g, int y) {
    if (y < 0 || y >= g.n()) throw validation_error("node index out of range");
    if (!g.children(y).empty())
        throw validation_error("Markov boundary formula requires a childless outcome: " + g.name(y));
    NodeSet mb(g.n());
    for (int p : g.parents(y)) mb.insert(p);
    NodeSet dis = district(g, y);
    mb |= dis;
    for (int d : dis.to_vector())
        for (int p : g.parents(d)) mb.insert(p);
    mb.erase(y);
    return mb;
}

}  // namespace causalmb
