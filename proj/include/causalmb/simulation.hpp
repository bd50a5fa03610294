#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalmb/dataset.hpp"
#include "causalmb/graph.hpp"
#include "causalmb/rng.hpp"

namespace causalmb {

/// Discrete Bayesian network over named nodes in topological order, with
/// multinomial CPTs. Serves as the ground-truth generator and the exact
/// inference oracle for the benchmarks.
///
/// CPT layout for a node: one probability row per parent configuration,
/// configurations coded mixed-radix over the (ascending-index) parent list,
/// first parent most significant.
class DiscreteBayesNet {
public:
    DiscreteBayesNet() = default;
    static DiscreteBayesNet make(std::vector<std::string> names, std::vector<int> arities,
                                 std::vector<std::vector<int>> parents,
                                 std::vector<std::vector<std::vector<double>>> cpts,
                                 std::vector<int> latent, std::optional<int> treatment,
                                 std::optional<int> outcome);

    int n() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }
    int index_of(const std::string& name) const;
    int arity(int i) const { return arities_[i]; }
    const std::vector<int>& arities() const { return arities_; }
    const std::vector<int>& parents(int i) const { return parents_[i]; }
    /// CPT row for node i under parent configuration j.
    const std::vector<double>& cpt_row(int i, uint64_t j) const { return cpts_[i][j]; }
    const std::vector<std::vector<double>>& cpt(int i) const { return cpts_[i]; }
    uint64_t parent_config(int i, const std::vector<int>& full_assignment) const;

    const std::vector<int>& latent() const { return latent_; }
    bool is_latent(int i) const { return latent_mask_[i] != 0; }
    std::optional<int> treatment() const { return treatment_; }
    std::optional<int> outcome() const { return outcome_; }
    /// Non-latent node indices, ascending.
    std::vector<int> observed() const;

    /// Directed-graph view with latent marks, for projection and
    /// graph-theoretic oracles.
    Smcm to_smcm() const;

private:
    std::vector<std::string> names_;
    std::vector<int> arities_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<std::vector<double>>> cpts_;
    std::vector<int> latent_;
    std::vector<uint8_t> latent_mask_;
    std::optional<int> treatment_;
    std::optional<int> outcome_;
};

/// Random ground-truth network: covariates ordered before the binary
/// treatment X and binary outcome Y, X -> Y forced, remaining edges
/// independent Bernoulli over the topological order with the rate tuned to
/// the target mean in-degree, covariate arities drawn from arity_choices,
/// n_lat covariates marked latent, CPT rows flat-Dirichlet floored at 1e-6.
/// Fully reproducible from the seed.
DiscreteBayesNet random_net(int n_obs, int n_lat, double mean_in_degree,
                            const std::vector<int>& arity_choices, uint64_t seed);

struct Intervention {
    int node;
    // Balanced-arm assignment: row i receives arm i mod arity, giving exact
    // arm counts rather than Bernoulli randomization.
};

/// Ancestral sampling; latent columns are dropped from the output. With an
/// intervention the node's mechanism is replaced by balanced-arm assignment
/// and the dataset is tagged experimental.
DiscreteDataset sample(const DiscreteBayesNet& net, int64_t n,
                       const std::optional<Intervention>& intervene, uint64_t seed);

/// Exact P(y = y_val | evidence, do(...)) by variable elimination on the full
/// network (latents included), min-weight elimination order. Throws
/// zero_evidence_error when the evidence has probability zero.
double exact_posterior(const DiscreteBayesNet& net, int y, int y_val,
                       const std::map<int, int>& evidence,
                       const std::optional<std::pair<int, int>>& do_assignment = std::nullopt);

/// The five-node collider-bias benchmark network: latent A and B, observed
/// M, X, Y, with noisy-AND mechanisms of strength alpha:
///   P(A=1) = P(B=1) = 0.8,
///   P(M=1 | A=1, B=1) = alpha,  P(X=1 | A=1) = alpha,
///   P(Y=1 | X=1, B=1) = alpha,  all other rows 0.
/// alpha must lie in [0.5, 1]. Intentionally non-positive: this is the
/// stress case for observational estimators.
DiscreteBayesNet m_bias_net(double alpha);

}  // namespace causalmb
