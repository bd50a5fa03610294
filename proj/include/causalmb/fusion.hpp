#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causalmb/dataset.hpp"
#include "causalmb/scoring.hpp"

namespace causalmb {

enum class HypothesisFlag {
    c,     // the set is the interventional Markov boundary and a causal one:
           // observational and experimental parameters coincide
    cbar,  // the set is the interventional Markov boundary but not causal:
           // only experimental data inform its parameters
};

/// One hypothesis about which set is the interventional Markov boundary,
/// with its posterior weight given both datasets.
struct HypothesisWeight {
    std::vector<int> z;  // dataset variable indices, ascending; contains the treatment
    HypothesisFlag flag = HypothesisFlag::cbar;
    double log_unnormalized = 0.0;
    double posterior = 0.0;
};

struct FusionOptions {
    /// Prior mass multiplier for the single c hypothesis relative to each
    /// cbar hypothesis (1 = uniform over all hypotheses).
    double c_prior_tilt = 1.0;
    /// Exhaustive hypothesis enumeration cap on |U* \ {x}|; beyond it the
    /// model degrades to a greedy singleton-removal chain.
    int exhaustive_cap = 16;
    ExecMode exec = ExecMode::parallel;
};

/// Bayesian-model-averaged post-intervention predictor. The hypothesis space
/// is the single c hypothesis on the committed Markov boundary plus one cbar
/// hypothesis per treatment-containing subset of it; hypotheses ruled out by
/// the committed boundary carry zero posterior and are never materialized.
/// Immutable once built; predict is pure.
class FusedModel {
public:
    struct HypothesisTables {
        CountTable t_o;
        CountTable t_e;
    };

    FusedModel(std::vector<Variable> variables, int x, int y, std::vector<int> u_star,
               bool x_forced, bool degraded, PriorSpec prior, double log_p_obs_given_mb,
               std::vector<HypothesisWeight> weights, std::vector<HypothesisTables> tables);

    const std::vector<Variable>& variables() const { return variables_; }
    int treatment() const { return x_; }
    int outcome() const { return y_; }
    int outcome_arity() const { return variables_[y_].arity; }
    const std::vector<int>& markov_boundary() const { return u_star_; }
    bool treatment_was_forced() const { return x_forced_; }
    bool degraded_enumeration() const { return degraded_; }
    const PriorSpec& prior() const { return prior_; }
    double log_p_obs_given_mb() const { return log_p_obs_given_mb_; }
    const std::vector<HypothesisWeight>& weights() const { return weights_; }
    const std::vector<HypothesisTables>& tables() const { return tables_; }

    /// Covariates (all variables except treatment and outcome), in dataset
    /// order; predict takes values aligned with this list.
    const std::vector<int>& covariate_indices() const { return covariates_; }

    /// Posterior-weighted mixture of per-hypothesis predictive rows for
    /// P(outcome | do(treatment = x_val), covariates = v). Returns a
    /// normalized distribution over outcome values.
    std::vector<double> predict(int x_val, const std::vector<int>& covariate_values) const;

    /// Mixture with the posterior clamped to one hypothesis; the reduction
    /// paths used by tests and baselines comparisons.
    std::vector<double> predict_clamped(size_t hypothesis_index, int x_val,
                                        const std::vector<int>& covariate_values) const;

private:
    std::vector<Variable> variables_;
    int x_;
    int y_;
    std::vector<int> u_star_;
    bool x_forced_;
    bool degraded_;
    PriorSpec prior_;
    double log_p_obs_given_mb_;
    std::vector<HypothesisWeight> weights_;
    std::vector<HypothesisTables> tables_;
    std::vector<int> covariates_;
    // Per hypothesis, per z member: position in the covariate list, or -1
    // for the treatment.
    std::vector<std::vector<int>> z_slots_;

    std::vector<double> hypothesis_row(size_t h, int x_val,
                                       const std::vector<int>& covariate_values) const;
};

/// Per-hypothesis predictive row: Dirichlet mean over pooled counts under c,
/// over experimental counts only under cbar.
double posterior_predictive(const CountTable& t_o, const CountTable& t_e, HypothesisFlag flag,
                            uint64_t j, int k, const PriorSpec& prior);

/// Posterior over the hypothesis space for a committed Markov boundary
/// u_star (must contain x). Softmax-normalized in log space; the common
/// observational marginal likelihood is included in every log_unnormalized
/// term and cancels in the normalization.
std::vector<HypothesisWeight> hypothesis_posteriors(const DiscreteDataset& d_o,
                                                    const DiscreteDataset& d_e, int x, int y,
                                                    const std::vector<int>& u_star,
                                                    const PriorSpec& prior,
                                                    const FusionOptions& options = {});

/// End-to-end fit: commit the Markov boundary of y on observational data,
/// enumerate hypotheses, weight them with both datasets, and return the
/// averaged predictor. The treatment is forced into the committed boundary
/// when the search drops it (flagged on the model). The experimental rows
/// must come from a randomized assignment of x; that is the caller's
/// responsibility and is not checked here.
FusedModel find_imb(const DiscreteDataset& d_o, const DiscreteDataset& d_e, int x, int y,
                    const std::vector<int>& covariates, const PriorSpec& prior,
                    FgesMode mb_mode = FgesMode::exhaustive, const FusionOptions& options = {});

}  // namespace causalmb
