#pragma once

#include <optional>
#include <vector>

#include "causalmb/graph.hpp"

namespace causalmb {

enum class CmbFailure {
    not_identifiable,                  // the candidate minus x is not a backdoor set
    redundant_or_identifiable_superset,// some extension is informative yet still identifiable
    not_minimal,                       // some proper subset is equally informative
};

/// Verdict for one causal-Markov-boundary candidate. `witness` carries the
/// extension or subset that certifies a condition-(2)/(3) failure.
struct CmbReport {
    NodeSet candidate;
    bool is_cmb = false;
    std::optional<CmbFailure> failed_condition;
    std::optional<NodeSet> witness;
};

/// True iff w m-separates x and y in the graph with x's outgoing edges
/// removed, i.e. w blocks every backdoor path.
bool is_backdoor_set(const Smcm& g, int x, int y, const NodeSet& w);

/// True iff there is no bidirected path x <-> v1 <-> ... <-> y in g in which
/// every intermediate node has a descendant in w or is an ancestor of y. For
/// pre-treatment w this is equivalent to w being extendable to a backdoor set,
/// and hence to identifiability of P(y | do(x), w).
bool is_subset_of_backdoor(const Smcm& g, int x, int y, const NodeSet& w);

/// The Markov boundary of y in the manipulated graph (incoming edges of x
/// removed). Contains x whenever x -> y exists.
NodeSet interventional_mb(const Smcm& g, int x, int y);

/// Evaluates the three causal-Markov-boundary conditions for candidate z
/// (which must contain x), encoded graphically under faithfulness:
///   (1) z \ {x} is a backdoor set;
///   (2) every disjoint extension is either irrelevant for y given z in the
///       manipulated graph, or breaks identifiability;
///   (3) no proper subset of z \ {x} renders the removed members irrelevant.
/// Reports the first failed condition in that order.
CmbReport is_cmb(const Smcm& g, int x, int y, const NodeSet& z);

/// All causal Markov boundaries among subsets of the Markov boundary of y
/// (plus x, which every candidate must contain). May be empty, e.g. when both
/// x -> y and x <-> y are present. Throws capacity_error when the Markov
/// boundary exceeds the enumeration cap.
std::vector<NodeSet> enumerate_cmbs(const Smcm& g, int x, int y);

/// Hard ceiling on |MB(y)| for enumerate_cmbs.
inline constexpr int kEnumerateCmbCap = 20;

/// Latent projection onto the non-latent nodes: u -> v when a directed path
/// through latent non-colliders exists, u <-> v when a path through latent
/// non-colliders has arrowheads at both ends. Treatment/outcome markers are
/// carried over and must not be latent.
Smcm latent_project(const Smcm& g);

}  // namespace causalmb
