#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "causalmb/nodeset.hpp"

namespace causalmb {

/// A semi-Markovian causal model: a mixed graph with directed edges (cause to
/// effect) and bidirected edges (latent confounding), plus optional treatment
/// and outcome markers and an optional latent marking used only as input to
/// latent projection.
///
/// Invariants enforced at construction:
///   - no self-loops, no duplicate edges (a directed and a bidirected edge may
///     coexist between the same pair);
///   - the directed part is acyclic;
///   - if treatment X and outcome Y are both set, the edge X -> Y exists and
///     every other node is a non-descendant of X (pre-treatment covariates).
///
/// Instances are immutable after construction; all queries are read-only and
/// safe to share across threads.
class Smcm {
public:
    Smcm() = default;

    static Smcm make(std::vector<std::string> nodes,
                     const std::vector<std::pair<std::string, std::string>>& directed,
                     const std::vector<std::pair<std::string, std::string>>& bidirected,
                     const std::optional<std::string>& treatment = std::nullopt,
                     const std::optional<std::string>& outcome = std::nullopt,
                     const std::vector<std::string>& latent = {});

    int n() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }
    /// Dense index for a node name; throws validation_error if unknown.
    int index_of(const std::string& name) const;
    bool has_node(const std::string& name) const { return index_.count(name) > 0; }

    const std::vector<int>& parents(int v) const { return parents_[v]; }
    const std::vector<int>& children(int v) const { return children_[v]; }
    /// Bidirected neighbors.
    const std::vector<int>& siblings(int v) const { return siblings_[v]; }

    bool has_directed(int u, int v) const;
    bool has_bidirected(int u, int v) const;

    /// Directed edges as (parent, child) index pairs, sorted.
    std::vector<std::pair<int, int>> directed_edges() const;
    /// Bidirected edges as (min, max) index pairs, sorted.
    std::vector<std::pair<int, int>> bidirected_edges() const;

    std::optional<int> treatment() const { return treatment_; }
    std::optional<int> outcome() const { return outcome_; }
    const NodeSet& latent() const { return latent_; }

    NodeSet empty_set() const { return NodeSet(n()); }
    NodeSet full_set() const;

    /// Used by graph surgery to build results without re-running validation
    /// (surgery can legitimately delete the X -> Y edge).
    struct Unchecked {};
    Smcm(Unchecked, std::vector<std::string> names, std::vector<std::vector<int>> parents,
         std::vector<std::vector<int>> children, std::vector<std::vector<int>> siblings,
         std::optional<int> treatment, std::optional<int> outcome, NodeSet latent);

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
    std::vector<std::vector<int>> siblings_;
    std::optional<int> treatment_;
    std::optional<int> outcome_;
    NodeSet latent_;

    void validate() const;
};

/// s plus everything reachable from s along directed edges.
NodeSet descendants(const Smcm& g, const NodeSet& s);

/// Ancestors-or-self of s along directed edges.
NodeSet ancestors(const Smcm& g, const NodeSet& s);

/// The district of y: the maximal set reachable from y through paths made
/// solely of bidirected edges. Always contains y.
NodeSet district(const Smcm& g, int y);

/// Graph with every edge carrying an arrowhead into x removed (directed edges
/// into x and all bidirected edges at x). This is the manipulated graph of a
/// hard intervention on x.
Smcm remove_incoming(const Smcm& g, int x);

/// Graph with every directed edge out of x removed; bidirected edges kept.
Smcm remove_outgoing(const Smcm& g, int x);

/// m-separation of a and b given z. A path is m-connecting given z when every
/// non-collider on it is outside z and every collider is in z or has a
/// descendant in z; bidirected edges carry arrowheads at both ends. Returns
/// true iff no m-connecting path exists. Inputs must be pairwise disjoint.
bool m_separated(const Smcm& g, const NodeSet& a, const NodeSet& b, const NodeSet& z);

/// The Markov boundary of y for a childless y: parents of y, the district of
/// y, and parents of district members, minus y itself. Throws if y has a
/// child, since the simplification only holds for pre-treatment covariates.
NodeSet observational_mb(const Smcm& g, int y);

}  // namespace causalmb
