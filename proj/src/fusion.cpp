#include "causalmb/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "causalmb/errors.hpp"

namespace causalmb {

namespace {

void check_inputs(const DiscreteDataset& d_o, const DiscreteDataset& d_e, int x, int y,
                  const std::vector<int>& u_star) {
    if (!d_o.same_schema(d_e))
        throw validation_error("observational and experimental datasets must share a schema");
    if (x < 0 || x >= d_o.n_variables() || y < 0 || y >= d_o.n_variables())
        throw validation_error("variable index out of range");
    if (x == y) throw validation_error("treatment and outcome must differ");
    bool has_x = false;
    for (size_t i = 0; i < u_star.size(); ++i) {
        const int v = u_star[i];
        if (v == y) throw validation_error("the Markov boundary of the outcome cannot contain it");
        if (v < 0 || v >= d_o.n_variables()) throw validation_error("boundary index out of range");
        if (v == x) has_x = true;
        for (size_t k = i + 1; k < u_star.size(); ++k)
            if (u_star[k] == v) throw validation_error("duplicate member in the Markov boundary");
    }
    if (!has_x) throw validation_error("the committed Markov boundary must contain the treatment");
}

// Candidate hypothesis sets: every treatment-containing subset of u_star in
// mask order over the sorted non-treatment members, or a greedy
// singleton-removal chain when the exact lattice is too large.
std::vector<std::vector<int>> hypothesis_sets(const DiscreteDataset& d_o, int x, int y,
                                              const std::vector<int>& u_star,
                                              const PriorSpec& prior, const FusionOptions& options,
                                              bool* degraded) {
    std::vector<int> rest;
    for (int v : u_star)
        if (v != x) rest.push_back(v);
    std::sort(rest.begin(), rest.end());

    std::vector<std::vector<int>> sets;
    *degraded = static_cast<int>(rest.size()) > options.exhaustive_cap;
    if (!*degraded) {
        const uint32_t total = 1u << rest.size();
        sets.reserve(total);
        for (uint32_t mask = 0; mask < total; ++mask) {
            std::vector<int> z{x};
            for (size_t i = 0; i < rest.size(); ++i)
                if (mask & (1u << i)) z.push_back(rest[i]);
            std::sort(z.begin(), z.end());
            sets.push_back(std::move(z));
        }
        return sets;
    }

    // Degraded mode: walk down the lattice dropping the member whose removal
    // keeps the best observational score, mirroring how the boundary itself
    // was committed.
    std::vector<int> current = rest;
    auto chain_score = [&](const std::vector<int>& members) {
        std::vector<int> z{x};
        z.insert(z.end(), members.begin(), members.end());
        std::sort(z.begin(), z.end());
        return log_bd_score(CountTable::tabulate(d_o, y, z), prior);
    };
    while (true) {
        std::vector<int> z{x};
        z.insert(z.end(), current.begin(), current.end());
        std::sort(z.begin(), z.end());
        sets.push_back(z);
        if (current.empty()) break;
        size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < current.size(); ++i) {
            std::vector<int> trial = current;
            trial.erase(trial.begin() + static_cast<int64_t>(i));
            double s = chain_score(trial);
            if (s > best_score) {
                best_score = s;
                best = i;
            }
        }
        current.erase(current.begin() + static_cast<int64_t>(best));
    }
    std::reverse(sets.begin(), sets.end());  // smallest set first, full set last
    return sets;
}

struct Enumeration {
    std::vector<HypothesisWeight> weights;
    std::vector<FusedModel::HypothesisTables> tables;
    double log_p_obs_given_mb = 0.0;
    bool degraded = false;
};

Enumeration enumerate_hypotheses(const DiscreteDataset& d_o, const DiscreteDataset& d_e, int x,
                                 int y, const std::vector<int>& u_star, const PriorSpec& prior,
                                 const FusionOptions& options) {
    check_inputs(d_o, d_e, x, y, u_star);

    Enumeration out;
    std::vector<std::vector<int>> sets =
        hypothesis_sets(d_o, x, y, u_star, prior, options, &out.degraded);

    std::vector<int> u_sorted = u_star;
    std::sort(u_sorted.begin(), u_sorted.end());

    // The observational marginal likelihood is shared by every surviving
    // hypothesis; it cancels in the normalization but is kept so the
    // reported log weights are complete.
    out.log_p_obs_given_mb = log_bd_score(CountTable::tabulate(d_o, y, u_sorted), prior);

    const size_t n_cbar = sets.size();
    const size_t n_hyp = n_cbar + 1;  // + the c hypothesis on u_star itself
    const double tilt = options.c_prior_tilt;
    if (!(tilt > 0.0)) throw validation_error("prior tilt must be positive");
    const double log_prior_cbar = std::log(1.0 / (tilt + static_cast<double>(n_cbar)));
    const double log_prior_c = std::log(tilt / (tilt + static_cast<double>(n_cbar)));

    out.weights.resize(n_hyp);
    out.tables.resize(n_hyp);

    // Hypothesis 0 is the c hypothesis; cbar hypotheses follow in set order.
    auto build = [&](size_t h) {
        const bool is_c = h == 0;
        const std::vector<int>& z = is_c ? u_sorted : sets[h - 1];
        CountTable t_o = CountTable::tabulate(d_o, y, z);
        CountTable t_e = CountTable::tabulate(d_e, y, z);
        HypothesisWeight w;
        w.z = z;
        w.flag = is_c ? HypothesisFlag::c : HypothesisFlag::cbar;
        double log_like = is_c ? log_ml_exp_given_obs(t_o, t_e, prior) : log_ml_exp_prior(t_e, prior);
        w.log_unnormalized =
            log_like + out.log_p_obs_given_mb + (is_c ? log_prior_c : log_prior_cbar);
        out.weights[h] = std::move(w);
        out.tables[h] = {std::move(t_o), std::move(t_e)};
    };

    if (options.exec == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int64_t h = 0; h < static_cast<int64_t>(n_hyp); ++h) build(static_cast<size_t>(h));
    } else {
        for (size_t h = 0; h < n_hyp; ++h) build(h);
    }

    // Softmax with max subtraction, accumulated in a fixed order.
    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& w : out.weights) max_log = std::max(max_log, w.log_unnormalized);
    double denom = 0.0;
    for (const auto& w : out.weights) denom += std::exp(w.log_unnormalized - max_log);
    for (auto& w : out.weights) w.posterior = std::exp(w.log_unnormalized - max_log) / denom;
    return out;
}

}  // namespace

double posterior_predictive(const CountTable& t_o, const CountTable& t_e, HypothesisFlag flag,
                            uint64_t j, int k, const PriorSpec& prior) {
    if (!t_o.same_schema(t_e))
        throw validation_error("observational and experimental tables must share a schema");
    if (flag == HypothesisFlag::cbar) return dirichlet_predictive(t_e, j, k, prior);
    if (k < 0 || k >= t_e.outcome_arity()) throw validation_error("outcome value out of range");
    const double a = prior.alpha_jk;
    return (static_cast<double>(t_o.count(j, k) + t_e.count(j, k)) + a) /
           (static_cast<double>(t_o.row_total(j) + t_e.row_total(j)) + a * t_e.outcome_arity());
}

std::vector<HypothesisWeight> hypothesis_posteriors(const DiscreteDataset& d_o,
                                                    const DiscreteDataset& d_e, int x, int y,
                                                    const std::vector<int>& u_star,
                                                    const PriorSpec& prior,
                                                    const FusionOptions& options) {
    return enumerate_hypotheses(d_o, d_e, x, y, u_star, prior, options).weights;
}

FusedModel::FusedModel(std::vector<Variable> variables, int x, int y, std::vector<int> u_star,
                       bool x_forced, bool degraded, PriorSpec prior, double log_p_obs_given_mb,
                       std::vector<HypothesisWeight> weights, std::vector<HypothesisTables> tables)
    : variables_(std::move(variables)),
      x_(x),
      y_(y),
      u_star_(std::move(u_star)),
      x_forced_(x_forced),
      degraded_(degraded),
      prior_(prior),
      log_p_obs_given_mb_(log_p_obs_given_mb),
      weights_(std::move(weights)),
      tables_(std::move(tables)) {
    if (weights_.size() != tables_.size())
        throw validation_error("hypothesis weights and tables must align");
    for (int i = 0; i < static_cast<int>(variables_.size()); ++i)
        if (i != x_ && i != y_) covariates_.push_back(i);
    std::vector<int> slot_of(variables_.size(), -1);
    for (size_t s = 0; s < covariates_.size(); ++s) slot_of[covariates_[s]] = static_cast<int>(s);
    z_slots_.reserve(weights_.size());
    for (const auto& w : weights_) {
        std::vector<int> slots;
        slots.reserve(w.z.size());
        for (int v : w.z) slots.push_back(v == x_ ? -1 : slot_of[v]);
        z_slots_.push_back(std::move(slots));
    }
}

std::vector<double> FusedModel::hypothesis_row(size_t h, int x_val,
                                               const std::vector<int>& covariate_values) const {
    const auto& w = weights_[h];
    const auto& slots = z_slots_[h];
    std::vector<int> z_values(slots.size());
    for (size_t i = 0; i < slots.size(); ++i)
        z_values[i] = slots[i] < 0 ? x_val : covariate_values[slots[i]];
    const uint64_t j = tables_[h].t_e.config_of(z_values);
    const int r = outcome_arity();
    std::vector<double> row(r);
    for (int k = 0; k < r; ++k)
        row[k] = posterior_predictive(tables_[h].t_o, tables_[h].t_e, w.flag, j, k, prior_);
    return row;
}

std::vector<double> FusedModel::predict(int x_val, const std::vector<int>& covariate_values) const {
    if (covariate_values.size() != covariates_.size())
        throw validation_error("predict requires a value for every covariate");
    if (x_val < 0 || x_val >= variables_[x_].arity)
        throw validation_error("treatment value out of range");
    for (size_t s = 0; s < covariates_.size(); ++s) {
        if (covariate_values[s] < 0 || covariate_values[s] >= variables_[covariates_[s]].arity)
            throw validation_error("unseen category for covariate " +
                                   variables_[covariates_[s]].name);
    }
    const int r = outcome_arity();
    std::vector<double> out(r, 0.0);
    for (size_t h = 0; h < weights_.size(); ++h) {
        if (weights_[h].posterior == 0.0) continue;
        std::vector<double> row = hypothesis_row(h, x_val, covariate_values);
        for (int k = 0; k < r; ++k) out[k] += weights_[h].posterior * row[k];
    }
    double total = 0.0;
    for (double p : out) total += p;
    for (double& p : out) p /= total;
    return out;
}

std::vector<double> FusedModel::predict_clamped(size_t hypothesis_index, int x_val,
                                                const std::vector<int>& covariate_values) const {
    if (hypothesis_index >= weights_.size()) throw validation_error("hypothesis index out of range");
    return hypothesis_row(hypothesis_index, x_val, covariate_values);
}

FusedModel find_imb(const DiscreteDataset& d_o, const DiscreteDataset& d_e, int x, int y,
                    const std::vector<int>& covariates, const PriorSpec& prior, FgesMode mb_mode,
                    const FusionOptions& options) {
    if (d_o.n_rows() == 0) throw validation_error("observational dataset is empty");
    if (!d_o.same_schema(d_e))
        throw validation_error("observational and experimental datasets must share a schema");
    if (y < 0 || y >= d_o.n_variables()) throw validation_error("outcome index out of range");

    std::vector<int> candidates = covariates;
    if (std::find(candidates.begin(), candidates.end(), x) == candidates.end())
        candidates.push_back(x);
    FgesResult mb = fges_mb(d_o, y, candidates, prior, mb_mode, options.exec);

    std::vector<int> u_star = mb.selected;
    bool x_forced = false;
    if (std::find(u_star.begin(), u_star.end(), x) == u_star.end()) {
        u_star.push_back(x);
        std::sort(u_star.begin(), u_star.end());
        x_forced = true;
    }

    Enumeration e = enumerate_hypotheses(d_o, d_e, x, y, u_star, prior, options);
    return FusedModel(d_o.variables(), x, y, u_star, x_forced, e.degraded, prior,
                      e.log_p_obs_given_mb, std::move(e.weights), std::move(e.tables));
}

}  // namespace causalmb
