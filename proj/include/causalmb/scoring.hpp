#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "causalmb/dataset.hpp"

namespace causalmb {

/// Symmetric Dirichlet pseudo-count per cell; the per-configuration total is
/// arity * alpha_jk.
struct PriorSpec {
    double alpha_jk = 1.0;
};

/// Whether data-parallel kernels run their OpenMP path or the serial
/// reference path. Both produce identical results; the serial path is kept as
/// the reference for tests and benchmarks.
enum class ExecMode { serial, parallel };

/// Sufficient statistics of an outcome against an ordered conditioning set:
/// counts n[j][k] for outcome value k under configuration j of the
/// conditioning variables. Configurations are coded mixed-radix in the given
/// variable order, first variable most significant:
///   j = ((v0 * r1 + v1) * r2 + v2) ...
/// Small tables are dense; large configuration spaces fall back to a hash
/// index over the configurations that actually occur (absent configurations
/// contribute nothing to any score). Immutable after construction.
class CountTable {
public:
    static CountTable tabulate(const DiscreteDataset& d, int y, const std::vector<int>& z);
    /// Build from explicit counts, row-major [j][k]; for tests and model io.
    static CountTable from_counts(std::vector<Variable> z_vars, Variable outcome,
                                  const std::vector<std::vector<int64_t>>& n_jk);

    int outcome_arity() const { return outcome_.arity; }
    const Variable& outcome() const { return outcome_; }
    uint64_t config_count() const { return q_; }
    const std::vector<Variable>& z_vars() const { return z_vars_; }
    int64_t total_rows() const { return total_; }

    /// Mixed-radix configuration index of a value assignment to z (given in
    /// z order).
    uint64_t config_of(const std::vector<int>& z_values) const;

    int64_t count(uint64_t j, int k) const;
    int64_t row_total(uint64_t j) const;

    /// Visit configurations with at least one observation, in increasing j.
    /// f(j, row_counts_ptr, row_total).
    template <typename F>
    void for_each_nonzero(F&& f) const {
        for (size_t g = 0; g < group_configs_.size(); ++g) {
            uint64_t j = group_configs_[g];
            const int64_t* row = counts_.data() + g * outcome_.arity;
            f(j, row, row_totals_[g]);
        }
    }

    bool same_schema(const CountTable& other) const;

private:
    std::vector<Variable> z_vars_;
    Variable outcome_;
    uint64_t q_ = 1;
    std::vector<uint64_t> strides_;
    int64_t total_ = 0;

    // Nonzero configurations, sorted by j; counts_ packs arity entries per
    // group. dense_index_ maps j -> group when q is small, group_lookup_
    // otherwise.
    std::vector<uint64_t> group_configs_;
    std::vector<int64_t> counts_;
    std::vector<int64_t> row_totals_;
    std::vector<int32_t> dense_index_;
    std::unordered_map<uint64_t, int32_t> group_lookup_;
    bool dense_ = true;

    int32_t group_of(uint64_t j) const;
    void build_index();
};

/// Bayesian-Dirichlet log marginal likelihood of the outcome given the
/// conditioning set, natural-log space:
///   sum_j [ lnG(a_j) - lnG(a_j + N_j) + sum_k ( lnG(a_jk + N_jk) - lnG(a_jk) ) ].
double log_bd_score(const CountTable& t, const PriorSpec& prior);

/// Same score with an explicit per-cell prior matrix (row-major j*r + k);
/// the per-row prior is the row sum of the matrix.
double log_bd_score_cellwise(const CountTable& t, const std::vector<double>& alpha_cells);

/// Log marginal likelihood of experimental data when the observational
/// posterior serves as the prior (observational and experimental parameters
/// coincide):
///   sum_j [ lnG(a_j + N^o_j) - lnG(a_j + N^o_j + N^e_j)
///           + sum_k ( lnG(a_jk + N^o_jk + N^e_jk) - lnG(a_jk + N^o_jk) ) ].
double log_ml_exp_given_obs(const CountTable& t_o, const CountTable& t_e, const PriorSpec& prior);

/// Log marginal likelihood of experimental data under the bare prior (no
/// parameter sharing with the observational data); identical to
/// log_bd_score(t_e, prior).
double log_ml_exp_prior(const CountTable& t_e, const PriorSpec& prior);

/// Dirichlet posterior mean P(Y = k | config j) from one table.
double dirichlet_predictive(const CountTable& t, uint64_t j, int k, const PriorSpec& prior);

struct FgesResult {
    std::vector<int> selected;  // dataset variable indices, ascending
    double score = 0.0;
};

enum class FgesMode { exhaustive, greedy };

inline constexpr int kFgesExhaustiveCap = 16;

/// Markov-boundary search by BD score over candidate conditioning sets.
/// Exhaustive mode scores every subset of the candidates and is the reference
/// semantics; greedy mode is forward selection followed by backward
/// elimination, accepting only strict improvements. Ties break toward smaller
/// sets, then lexicographically by variable names, so the result does not
/// depend on candidate order or on the parallel schedule.
FgesResult fges_mb(const DiscreteDataset& d, int y, const std::vector<int>& candidates,
                   const PriorSpec& prior, FgesMode mode = FgesMode::exhaustive,
                   ExecMode exec = ExecMode::parallel);

/// Scores of every candidate subset, indexed by bitmask over `candidates`.
/// The OpenMP kernel behind exhaustive fges_mb; the serial path is the
/// reference implementation.
std::vector<double> exhaustive_subset_scores(const DiscreteDataset& d, int y,
                                             const std::vector<int>& candidates,
                                             const PriorSpec& prior,
                                             ExecMode exec = ExecMode::parallel);

}  // namespace causalmb
