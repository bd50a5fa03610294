#include "causalmb/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "causalmb/errors.hpp"

namespace causalmb {

namespace {

constexpr uint64_t kDenseConfigCap = uint64_t{1} << 20;

void check_prior(const PriorSpec& prior) {
    if (!(prior.alpha_jk > 0.0)) throw validation_error("prior pseudo-count must be positive");
}

}  // namespace

CountTable CountTable::tabulate(const DiscreteDataset& d, int y, const std::vector<int>& z) {
    if (y < 0 || y >= d.n_variables()) throw validation_error("outcome index out of range");
    CountTable t;
    t.outcome_ = d.variable(y);
    t.z_vars_.reserve(z.size());
    for (int zi : z) {
        if (zi < 0 || zi >= d.n_variables()) throw validation_error("conditioning index out of range");
        if (zi == y) throw validation_error("outcome cannot appear in its own conditioning set");
        t.z_vars_.push_back(d.variable(zi));
    }
    t.strides_.assign(z.size(), 1);
    t.q_ = 1;
    for (int i = static_cast<int>(z.size()) - 1; i >= 0; --i) {
        t.strides_[i] = t.q_;
        uint64_t arity = static_cast<uint64_t>(t.z_vars_[i].arity);
        if (t.q_ > (uint64_t{1} << 62) / arity)
            throw capacity_error("conditioning configuration space overflows 64 bits");
        t.q_ *= arity;
    }

    const int r = t.outcome_.arity;
    const int64_t n = d.n_rows();
    const uint8_t* ycol = d.column(y).data();

    if (t.q_ <= kDenseConfigCap) {
        std::vector<int64_t> full(static_cast<size_t>(t.q_) * r, 0);
        std::vector<const uint8_t*> cols(z.size());
        for (size_t i = 0; i < z.size(); ++i) cols[i] = d.column(z[i]).data();
        for (int64_t row = 0; row < n; ++row) {
            uint64_t j = 0;
            for (size_t i = 0; i < z.size(); ++i) j += t.strides_[i] * cols[i][row];
            ++full[j * r + ycol[row]];
        }
        for (uint64_t j = 0; j < t.q_; ++j) {
            int64_t nj = 0;
            for (int k = 0; k < r; ++k) nj += full[j * r + k];
            if (nj == 0) continue;
            t.group_configs_.push_back(j);
            for (int k = 0; k < r; ++k) t.counts_.push_back(full[j * r + k]);
            t.row_totals_.push_back(nj);
        }
    } else {
        std::map<uint64_t, std::vector<int64_t>> groups;
        std::vector<const uint8_t*> cols(z.size());
        for (size_t i = 0; i < z.size(); ++i) cols[i] = d.column(z[i]).data();
        for (int64_t row = 0; row < n; ++row) {
            uint64_t j = 0;
            for (size_t i = 0; i < z.size(); ++i) j += t.strides_[i] * cols[i][row];
            auto& g = groups[j];
            if (g.empty()) g.assign(r, 0);
            ++g[ycol[row]];
        }
        for (auto& [j, row] : groups) {
            t.group_configs_.push_back(j);
            int64_t nj = 0;
            for (int k = 0; k < r; ++k) {
                t.counts_.push_back(row[k]);
                nj += row[k];
            }
            t.row_totals_.push_back(nj);
        }
    }
    t.total_ = n;
    t.build_index();
    return t;
}

CountTable CountTable::from_counts(std::vector<Variable> z_vars, Variable outcome,
                                   const std::vector<std::vector<int64_t>>& n_jk) {
    CountTable t;
    t.z_vars_ = std::move(z_vars);
    t.outcome_ = std::move(outcome);
    t.strides_.assign(t.z_vars_.size(), 1);
    t.q_ = 1;
    for (int i = static_cast<int>(t.z_vars_.size()) - 1; i >= 0; --i) {
        t.strides_[i] = t.q_;
        t.q_ *= static_cast<uint64_t>(t.z_vars_[i].arity);
    }
    if (n_jk.size() != t.q_) throw validation_error("count matrix must have one row per configuration");
    for (uint64_t j = 0; j < t.q_; ++j) {
        if (static_cast<int>(n_jk[j].size()) != t.outcome_.arity)
            throw validation_error("count row width must equal the outcome arity");
        int64_t nj = 0;
        for (int64_t c : n_jk[j]) {
            if (c < 0) throw validation_error("counts must be nonnegative");
            nj += c;
        }
        if (nj == 0) continue;
        t.group_configs_.push_back(j);
        for (int64_t c : n_jk[j]) t.counts_.push_back(c);
        t.row_totals_.push_back(nj);
        t.total_ += nj;
    }
    t.build_index();
    return t;
}

void CountTable::build_index() {
    dense_ = q_ <= kDenseConfigCap;
    if (dense_) {
        dense_index_.assign(static_cast<size_t>(q_), -1);
        for (size_t g = 0; g < group_configs_.size(); ++g)
            dense_index_[group_configs_[g]] = static_cast<int32_t>(g);
    } else {
        group_lookup_.reserve(group_configs_.size() * 2);
        for (size_t g = 0; g < group_configs_.size(); ++g)
            group_lookup_.emplace(group_configs_[g], static_cast<int32_t>(g));
    }
}

int32_t CountTable::group_of(uint64_t j) const {
    if (j >= q_) throw validation_error("configuration index out of range");
    if (dense_) return dense_index_[j];
    auto it = group_lookup_.find(j);
    return it == group_lookup_.end() ? -1 : it->second;
}

uint64_t CountTable::config_of(const std::vector<int>& z_values) const {
    if (z_values.size() != z_vars_.size())
        throw validation_error("configuration width does not match the conditioning set");
    uint64_t j = 0;
    for (size_t i = 0; i < z_values.size(); ++i) {
        if (z_values[i] < 0 || z_values[i] >= z_vars_[i].arity)
            throw validation_error("value out of range for variable " + z_vars_[i].name);
        j += strides_[i] * static_cast<uint64_t>(z_values[i]);
    }
    return j;
}

int64_t CountTable::count(uint64_t j, int k) const {
    if (k < 0 || k >= outcome_.arity) throw validation_error("outcome value out of range");
    int32_t g = group_of(j);
    return g < 0 ? 0 : counts_[static_cast<size_t>(g) * outcome_.arity + k];
}

int64_t CountTable::row_total(uint64_t j) const {
    int32_t g = group_of(j);
    return g < 0 ? 0 : row_totals_[g];
}

bool CountTable::same_schema(const CountTable& other) const {
    if (outcome_.name != other.outcome_.name || outcome_.arity != other.outcome_.arity) return false;
    if (z_vars_.size() != other.z_vars_.size()) return false;
    for (size_t i = 0; i < z_vars_.size(); ++i) {
        if (z_vars_[i].name != other.z_vars_[i].name || z_vars_[i].arity != other.z_vars_[i].arity)
            return false;
    }
    return true;
}

double log_bd_score(const CountTable& t, const PriorSpec& prior) {
    check_prior(prior);
    const int r = t.outcome_arity();
    const double a = prior.alpha_jk;
    const double aj = a * r;
    const double lg_aj = std::lgamma(aj);
    const double lg_a = std::lgamma(a);
    double total = 0.0;
    t.for_each_nonzero([&](uint64_t, const int64_t* row, int64_t nj) {
        total += lg_aj - std::lgamma(aj + static_cast<double>(nj));
        for (int k = 0; k < r; ++k)
            total += std::lgamma(a + static_cast<double>(row[k])) - lg_a;
    });
    return total;
}

double log_bd_score_cellwise(const CountTable& t, const std::vector<double>& alpha_cells) {
    const int r = t.outcome_arity();
    if (alpha_cells.size() != t.config_count() * static_cast<uint64_t>(r))
        throw validation_error("cellwise prior must cover every (configuration, outcome) cell");
    for (double a : alpha_cells)
        if (!(a > 0.0)) throw validation_error("prior pseudo-count must be positive");
    double total = 0.0;
    t.for_each_nonzero([&](uint64_t j, const int64_t* row, int64_t nj) {
        double aj = 0.0;
        for (int k = 0; k < r; ++k) aj += alpha_cells[j * r + k];
        total += std::lgamma(aj) - std::lgamma(aj + static_cast<double>(nj));
        for (int k = 0; k < r; ++k) {
            double a = alpha_cells[j * r + k];
            total += std::lgamma(a + static_cast<double>(row[k])) - std::lgamma(a);
        }
    });
    return total;
}

double log_ml_exp_given_obs(const CountTable& t_o, const CountTable& t_e, const PriorSpec& prior) {
    check_prior(prior);
    if (!t_o.same_schema(t_e))
        throw validation_error("observational and experimental tables must share a schema");
    const int r = t_e.outcome_arity();
    const double a = prior.alpha_jk;
    const double aj = a * r;
    double total = 0.0;
    t_e.for_each_nonzero([&](uint64_t j, const int64_t* row, int64_t nje) {
        const int64_t njo = t_o.row_total(j);
        total += std::lgamma(aj + static_cast<double>(njo)) -
                 std::lgamma(aj + static_cast<double>(njo + nje));
        for (int k = 0; k < r; ++k) {
            const int64_t no = t_o.count(j, k);
            total += std::lgamma(a + static_cast<double>(no + row[k])) -
                     std::lgamma(a + static_cast<double>(no));
        }
    });
    return total;
}

double log_ml_exp_prior(const CountTable& t_e, const PriorSpec& prior) {
    return log_bd_score(t_e, prior);
}

double dirichlet_predictive(const CountTable& t, uint64_t j, int k, const PriorSpec& prior) {
    check_prior(prior);
    if (k < 0 || k >= t.outcome_arity()) throw validation_error("outcome value out of range");
    const double a = prior.alpha_jk;
    return (static_cast<double>(t.count(j, k)) + a) /
           (static_cast<double>(t.row_total(j)) + a * t.outcome_arity());
}

namespace {

// BD scorer with lgamma tables over integer counts, for the hot exhaustive
// loop. Valid for counts up to max_n.
class BdScorer {
public:
    BdScorer(const PriorSpec& prior, int r, int64_t max_n)
        : r_(r), cell_(static_cast<size_t>(max_n) + 1), row_(static_cast<size_t>(max_n) + 1) {
        const double a = prior.alpha_jk;
        const double aj = a * r;
        const double lg_a = std::lgamma(a);
        const double lg_aj = std::lgamma(aj);
        for (int64_t i = 0; i <= max_n; ++i) {
            cell_[i] = std::lgamma(a + static_cast<double>(i)) - lg_a;
            row_[i] = lg_aj - std::lgamma(aj + static_cast<double>(i));
        }
    }

    double score(const CountTable& t) const {
        double total = 0.0;
        t.for_each_nonzero([&](uint64_t, const int64_t* row, int64_t nj) {
            total += row_[nj];
            for (int k = 0; k < r_; ++k) total += cell_[row[k]];
        });
        return total;
    }

private:
    int r_;
    std::vector<double> cell_;
    std::vector<double> row_;
};

std::vector<int> subset_indices(const std::vector<int>& candidates, uint32_t mask) {
    std::vector<int> z;
    for (size_t i = 0; i < candidates.size(); ++i)
        if (mask & (1u << i)) z.push_back(candidates[i]);
    return z;
}

void check_candidates(const DiscreteDataset& d, int y, const std::vector<int>& candidates) {
    if (y < 0 || y >= d.n_variables()) throw validation_error("outcome index out of range");
    for (int c : candidates) {
        if (c < 0 || c >= d.n_variables()) throw validation_error("candidate index out of range");
        if (c == y) throw validation_error("outcome cannot be its own candidate");
    }
    for (size_t i = 0; i < candidates.size(); ++i)
        for (size_t k = i + 1; k < candidates.size(); ++k)
            if (candidates[i] == candidates[k]) throw validation_error("duplicate candidate");
}

// Canonical tie-break key: smaller set first, then the sorted name sequence.
std::vector<std::string> name_key(const DiscreteDataset& d, const std::vector<int>& z) {
    std::vector<std::string> names;
    names.reserve(z.size());
    for (int i : z) names.push_back(d.variable(i).name);
    std::sort(names.begin(), names.end());
    return names;
}

bool better(double score_a, const std::vector<std::string>& key_a, double score_b,
            const std::vector<std::string>& key_b) {
    if (score_a != score_b) return score_a > score_b;
    if (key_a.size() != key_b.size()) return key_a.size() < key_b.size();
    return key_a < key_b;
}

}  // namespace

std::vector<double> exhaustive_subset_scores(const DiscreteDataset& d, int y,
                                             const std::vector<int>& candidates,
                                             const PriorSpec& prior, ExecMode exec) {
    check_prior(prior);
    check_candidates(d, y, candidates);
    if (static_cast<int>(candidates.size()) > kFgesExhaustiveCap)
        throw capacity_error("exhaustive search is capped at " + std::to_string(kFgesExhaustiveCap) +
                             " candidates");
    const uint32_t total = 1u << candidates.size();
    std::vector<double> scores(total);
    const BdScorer scorer(prior, d.variable(y).arity, d.n_rows());

    if (exec == ExecMode::serial) {
        for (uint32_t mask = 0; mask < total; ++mask)
            scores[mask] = scorer.score(CountTable::tabulate(d, y, subset_indices(candidates, mask)));
        return scores;
    }
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t mask = 0; mask < static_cast<int64_t>(total); ++mask)
        scores[mask] = scorer.score(
            CountTable::tabulate(d, y, subset_indices(candidates, static_cast<uint32_t>(mask))));
    return scores;
}

FgesResult fges_mb(const DiscreteDataset& d, int y, const std::vector<int>& candidates,
                   const PriorSpec& prior, FgesMode mode, ExecMode exec) {
    check_prior(prior);
    check_candidates(d, y, candidates);

    if (mode == FgesMode::exhaustive) {
        const std::vector<double> scores = exhaustive_subset_scores(d, y, candidates, prior, exec);
        uint32_t best_mask = 0;
        double best_score = scores[0];
        std::vector<std::string> best_key;  // empty set
        for (uint32_t mask = 1; mask < scores.size(); ++mask) {
            auto key = name_key(d, subset_indices(candidates, mask));
            if (better(scores[mask], key, best_score, best_key)) {
                best_mask = mask;
                best_score = scores[mask];
                best_key = std::move(key);
            }
        }
        std::vector<int> selected = subset_indices(candidates, best_mask);
        std::sort(selected.begin(), selected.end());
        return {selected, best_score};
    }

    // Greedy: forward selection then backward elimination, strict
    // improvements only.
    auto score_of = [&](const std::vector<int>& z) {
        return log_bd_score(CountTable::tabulate(d, y, z), prior);
    };
    std::vector<int> current;
    double current_score = score_of(current);
    std::vector<int> remaining = candidates;
    std::sort(remaining.begin(), remaining.end(),
              [&](int a, int b) { return d.variable(a).name < d.variable(b).name; });

    bool grew = true;
    while (grew) {
        grew = false;
        int best_add = -1;
        double best_score = current_score;
        for (int c : remaining) {
            std::vector<int> trial = current;
            trial.push_back(c);
            double s = score_of(trial);
            if (s > best_score) {
                best_score = s;
                best_add = c;
            }
        }
        if (best_add >= 0) {
            current.push_back(best_add);
            remaining.erase(std::find(remaining.begin(), remaining.end(), best_add));
            current_score = best_score;
            grew = true;
        }
    }
    bool shrank = true;
    while (shrank && !current.empty()) {
        shrank = false;
        int best_drop = -1;
        double best_score = current_score;
        for (size_t i = 0; i < current.size(); ++i) {
            std::vector<int> trial = current;
            trial.erase(trial.begin() + static_cast<int64_t>(i));
            double s = score_of(trial);
            if (s > best_score) {
                best_score = s;
                best_drop = static_cast<int>(i);
            }
        }
        if (best_drop >= 0) {
            current.erase(current.begin() + best_drop);
            current_score = best_score;
            shrank = true;
        }
    }
    std::sort(current.begin(), current.end());
    return {current, current_score};
}

}  // namespace causalmb
