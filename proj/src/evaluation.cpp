#include "causalmb/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "causalmb/errors.hpp"
#include "causalmb/io.hpp"
#include "causalmb/simulation.hpp"

namespace causalmb {

double mean_abs_bias(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size())
        throw validation_error("prediction and truth vectors must have equal length");
    if (pred.empty()) throw validation_error("cannot average over zero rows");
    double total = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - truth[i]);
    return total / static_cast<double>(pred.size());
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw validation_error("scores and labels must have equal length");
    int64_t n1 = 0, n0 = 0;
    for (int l : labels) {
        if (l == 1)
            ++n1;
        else if (l == 0)
            ++n0;
        else
            throw validation_error("labels must be binary");
    }
    if (n1 == 0 || n0 == 0) return 0.5;

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return scores[i] < scores[j]; });

    // Rank sum of the positive class with midranks for ties.
    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += midrank;
        i = j;
    }
    const double u1 = rank_sum_pos - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
    return u1 / (static_cast<double>(n1) * static_cast<double>(n0));
}

double signed_rank_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw validation_error("paired vectors must have equal length");
    std::vector<double> diffs;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);  // zero differences dropped
    }
    const size_t n = diffs.size();
    if (n == 0) return 1.0;

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return std::abs(diffs[i]) < std::abs(diffs[j]); });

    std::vector<double> ranks(n);
    std::vector<int64_t> tie_sizes;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k) ranks[order[k]] = midrank;
        tie_sizes.push_back(static_cast<int64_t>(j - i));
        i = j;
    }

    double w_plus = 0.0;
    for (size_t k = 0; k < n; ++k)
        if (diffs[k] > 0.0) w_plus += ranks[k];

    if (n <= 200) {
        // Exact null distribution over doubled ranks (integers even with
        // midranks).
        std::vector<int64_t> r2(n);
        int64_t total = 0;
        for (size_t k = 0; k < n; ++k) {
            r2[k] = std::llround(2.0 * ranks[k]);
            total += r2[k];
        }
        std::vector<double> dp(static_cast<size_t>(total) + 1, 0.0);
        dp[0] = 1.0;
        int64_t reach = 0;
        for (size_t k = 0; k < n; ++k) {
            reach += r2[k];
            for (int64_t w = reach; w >= 0; --w) {
                const double stay = dp[w] * 0.5;
                const double move = (w >= r2[k]) ? dp[w - r2[k]] * 0.5 : 0.0;
                dp[w] = stay + move;
            }
        }
        const int64_t w2 = std::llround(2.0 * w_plus);
        double p = 0.0;
        for (int64_t w = 0; w <= w2 && w <= total; ++w) p += dp[w];
        return std::min(1.0, p);
    }

    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    for (int64_t t : tie_sizes) {
        const double td = static_cast<double>(t);
        var -= (td * td * td - td) / 48.0;
    }
    const double z = (w_plus - mu + 0.5) / std::sqrt(var);
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

SetPredictor::SetPredictor(const DiscreteDataset& d, int x, int y, std::vector<int> z_with_x,
                           PriorSpec prior, bool x_forced)
    : z_(std::move(z_with_x)), prior_(prior), x_forced_(x_forced) {
    if (x < 0 || x >= d.n_variables() || y < 0 || y >= d.n_variables() || x == y)
        throw validation_error("invalid treatment/outcome indices");
    std::sort(z_.begin(), z_.end());
    if (std::find(z_.begin(), z_.end(), x) == z_.end())
        throw validation_error("the conditioning set must contain the treatment");
    if (std::find(z_.begin(), z_.end(), y) != z_.end())
        throw validation_error("the conditioning set cannot contain the outcome");
    table_ = CountTable::tabulate(d, y, z_);
    outcome_arity_ = d.variable(y).arity;
    x_arity_ = d.variable(x).arity;

    std::vector<int> slot_of(d.n_variables(), -1);
    int s = 0;
    for (int i = 0; i < d.n_variables(); ++i)
        if (i != x && i != y) slot_of[i] = s++;
    for (int v : z_) z_slots_.push_back(v == x ? -1 : slot_of[v]);
}

std::vector<double> SetPredictor::predict(int x_val,
                                          const std::vector<int>& covariate_values) const {
    if (x_val < 0 || x_val >= x_arity_) throw validation_error("treatment value out of range");
    std::vector<int> z_values(z_slots_.size());
    for (size_t i = 0; i < z_slots_.size(); ++i)
        z_values[i] = z_slots_[i] < 0 ? x_val : covariate_values[z_slots_[i]];
    const uint64_t j = table_.config_of(z_values);
    std::vector<double> out(outcome_arity_);
    for (int k = 0; k < outcome_arity_; ++k) out[k] = dirichlet_predictive(table_, j, k, prior_);
    return out;
}

namespace {

SetPredictor selection_baseline(const DiscreteDataset& d, int x, int y,
                                const std::vector<int>& covariates, const PriorSpec& prior,
                                ExecMode exec) {
    if (d.n_rows() == 0) throw validation_error("cannot fit a predictor on an empty dataset");
    std::vector<int> candidates = covariates;
    if (std::find(candidates.begin(), candidates.end(), x) == candidates.end())
        candidates.push_back(x);
    FgesResult mb = fges_mb(d, y, candidates, prior, FgesMode::exhaustive, exec);
    std::vector<int> z = mb.selected;
    bool forced = false;
    if (std::find(z.begin(), z.end(), x) == z.end()) {
        z.push_back(x);
        forced = true;
    }
    return SetPredictor(d, x, y, std::move(z), prior, forced);
}

}  // namespace

SetPredictor baseline_imb_only(const DiscreteDataset& d_e, int x, int y,
                               const std::vector<int>& covariates, const PriorSpec& prior,
                               ExecMode exec) {
    return selection_baseline(d_e, x, y, covariates, prior, exec);
}

SetPredictor baseline_omb_only(const DiscreteDataset& d_o, int x, int y,
                               const std::vector<int>& covariates, const PriorSpec& prior,
                               ExecMode exec) {
    return selection_baseline(d_o, x, y, covariates, prior, exec);
}

void ExperimentConfig::validate() const {
    if (replications <= 0) throw validation_error("replication count must be positive");
    if (n_observed < 2) throw validation_error("need at least two observed nodes");
    if (n_latent < 0) throw validation_error("latent count must be nonnegative");
    if (n_obs <= 0 || n_test <= 0) throw validation_error("sample sizes must be positive");
    if (n_exp_grid.empty()) throw validation_error("experimental size grid must be nonempty");
    for (int ne : n_exp_grid)
        if (ne <= 0) throw validation_error("experimental sizes must be positive");
    if (!(alpha > 0.0)) throw validation_error("prior pseudo-count must be positive");
    if (methods.empty()) throw validation_error("at least one method is required");
    for (const auto& m : methods)
        if (m != "findimb" && m != "imb_only" && m != "omb_only")
            throw validation_error("unknown method: " + m);
}

namespace {

std::string format_result_row(const ResultRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.12g,%.12g", r.seed, r.method.c_str(), r.n_exp,
                  r.mean_abs_bias, r.auc);
    return buf;
}

// Canonical within-seed order: n_exp ascending, then method in config order.
std::vector<ResultRow> sort_seed_rows(std::vector<ResultRow> rows, const ExperimentConfig& cfg) {
    auto method_rank = [&](const std::string& m) {
        for (size_t i = 0; i < cfg.methods.size(); ++i)
            if (cfg.methods[i] == m) return i;
        return cfg.methods.size();
    };
    std::sort(rows.begin(), rows.end(), [&](const ResultRow& a, const ResultRow& b) {
        if (a.n_exp != b.n_exp) return a.n_exp < b.n_exp;
        return method_rank(a.method) < method_rank(b.method);
    });
    return rows;
}

std::vector<ResultRow> replicate(const ExperimentConfig& cfg, int rep, ExecMode exec) {
    const Rng base(cfg.seed_base);
    const uint64_t tag = static_cast<uint64_t>(rep) * 16;
    const DiscreteBayesNet net = random_net(cfg.n_observed, cfg.n_latent, cfg.mean_in_degree,
                                            cfg.arity_choices, base.fork(tag + 1).next_u64());
    const int x_net = *net.treatment();
    const int y_net = *net.outcome();

    const DiscreteDataset d_o = sample(net, cfg.n_obs, std::nullopt, base.fork(tag + 2).next_u64());
    const DiscreteDataset d_test =
        sample(net, cfg.n_test, Intervention{x_net}, base.fork(tag + 3).next_u64());

    const int x = d_o.index_of(net.name(x_net));
    const int y = d_o.index_of(net.name(y_net));
    std::vector<int> covariates;
    for (int i = 0; i < d_o.n_variables(); ++i)
        if (i != x && i != y) covariates.push_back(i);

    // Net-node index of each dataset column, for the truth queries.
    std::vector<int> col_to_node(d_o.n_variables());
    for (int i = 0; i < d_o.n_variables(); ++i)
        col_to_node[i] = net.index_of(d_o.variable(i).name);

    const int64_t n_test = d_test.n_rows();
    std::vector<double> truth(n_test);
    std::vector<int> labels(n_test);
    std::vector<std::vector<int>> cov_rows(n_test, std::vector<int>(covariates.size()));
    std::vector<int> x_vals(n_test);
    for (int64_t row = 0; row < n_test; ++row) {
        std::map<int, int> evidence;
        for (size_t c = 0; c < covariates.size(); ++c) {
            cov_rows[row][c] = d_test.at(row, covariates[c]);
            evidence[col_to_node[covariates[c]]] = cov_rows[row][c];
        }
        x_vals[row] = d_test.at(row, x);
        labels[row] = d_test.at(row, y);
        truth[row] =
            exact_posterior(net, y_net, 1, evidence, std::make_pair(x_net, x_vals[row]));
    }

    const PriorSpec prior{cfg.alpha};
    std::vector<ResultRow> rows;

    for (int ne : cfg.n_exp_grid) {
        const DiscreteDataset d_e = sample(net, ne, Intervention{x_net},
                                           base.fork(tag + 8).fork(static_cast<uint64_t>(ne)).next_u64());
        for (const std::string& method : cfg.methods) {
            const auto t0 = std::chrono::steady_clock::now();
            std::vector<double> pred(n_test);
            if (method == "findimb") {
                const FusedModel model =
                    find_imb(d_o, d_e, x, y, covariates, prior, FgesMode::exhaustive,
                             FusionOptions{.exec = exec});
                for (int64_t row = 0; row < n_test; ++row)
                    pred[row] = model.predict(x_vals[row], cov_rows[row])[1];
            } else {
                const SetPredictor predictor =
                    method == "imb_only" ? baseline_imb_only(d_e, x, y, covariates, prior, exec)
                                         : baseline_omb_only(d_o, x, y, covariates, prior, exec);
                for (int64_t row = 0; row < n_test; ++row)
                    pred[row] = predictor.predict(x_vals[row], cov_rows[row])[1];
            }
            const auto t1 = std::chrono::steady_clock::now();
            ResultRow r;
            r.seed = rep;
            r.method = method;
            r.n_exp = ne;
            r.mean_abs_bias = mean_abs_bias(pred, truth);
            r.auc = auc(pred, labels);
            r.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
            rows.push_back(std::move(r));
        }
    }
    return sort_seed_rows(std::move(rows), cfg);
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, ExecMode exec) {
    cfg.validate();
    const bool persist = !cfg.out_dir.empty();
    const size_t rows_per_seed = cfg.methods.size() * cfg.n_exp_grid.size();

    std::map<int, std::vector<ResultRow>> done;
    if (persist) {
        std::filesystem::create_directories(cfg.out_dir);
        const std::string results_path = cfg.out_dir + "/results.csv";
        if (std::filesystem::exists(results_path)) {
            for (const ResultRow& r : read_results_csv(results_path)) done[r.seed].push_back(r);
            for (auto it = done.begin(); it != done.end();) {
                if (it->second.size() != rows_per_seed || it->first < 0 ||
                    it->first >= cfg.replications)
                    it = done.erase(it);  // partial or out-of-range seeds are recomputed
                else
                    ++it;
            }
            for (auto& [seed, rows] : done) rows = sort_seed_rows(std::move(rows), cfg);
        }
    }

    std::vector<std::vector<ResultRow>> by_seed(cfg.replications);
    std::vector<uint8_t> ready(cfg.replications, 0);
    for (auto& [seed, rows] : done) {
        by_seed[seed] = rows;
        ready[seed] = 1;
    }

    std::ofstream results_out, timings_out;
    if (persist) {
        results_out.open(cfg.out_dir + "/results.csv", std::ios::trunc);
        results_out << "seed,method,n_exp,mean_abs_bias,auc\n";
        timings_out.open(cfg.out_dir + "/timings.csv", std::ios::trunc);
        timings_out << "seed,method,n_exp,wall_time_s\n";
        write_manifest(cfg, cfg.out_dir + "/manifest.json");
    }

    int next_flush = 0;
    auto flush_ready = [&]() {
        while (next_flush < cfg.replications && ready[next_flush]) {
            if (persist) {
                for (const ResultRow& r : by_seed[next_flush]) {
                    results_out << format_result_row(r) << "\n";
                    char buf[96];
                    std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.6f", r.seed, r.method.c_str(),
                                  r.n_exp, r.wall_time_s);
                    timings_out << buf << "\n";
                }
                results_out.flush();
                timings_out.flush();
            }
            ++next_flush;
        }
    };
    flush_ready();

#pragma omp parallel for schedule(dynamic) if (exec == ExecMode::parallel)
    for (int rep = 0; rep < cfg.replications; ++rep) {
        if (ready[rep]) continue;
        // Inner kernels stay serial when seeds fan out in parallel.
        std::vector<ResultRow> rows =
            replicate(cfg, rep, exec == ExecMode::parallel ? ExecMode::serial : exec);
#pragma omp critical(causalmb_result_writer)
        {
            by_seed[rep] = std::move(rows);
            ready[rep] = 1;
            flush_ready();
        }
    }
    flush_ready();

    std::vector<ResultRow> all;
    all.reserve(static_cast<size_t>(cfg.replications) * rows_per_seed);
    for (const auto& rows : by_seed) all.insert(all.end(), rows.begin(), rows.end());
    return all;
}

double median(std::vector<double> values) {
    if (values.empty()) throw validation_error("median of an empty vector");
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<double> metric_column(const std::vector<ResultRow>& rows, const std::string& method,
                                  int n_exp) {
    std::vector<std::pair<int, double>> picked;
    for (const ResultRow& r : rows)
        if (r.method == method && r.n_exp == n_exp) picked.emplace_back(r.seed, r.mean_abs_bias);
    std::sort(picked.begin(), picked.end());
    std::vector<double> out;
    out.reserve(picked.size());
    for (auto& [seed, v] : picked) out.push_back(v);
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    std::map<std::pair<std::string, int>, std::vector<const ResultRow*>> cells;
    for (const ResultRow& r : rows) cells[{r.method, r.n_exp}].push_back(&r);
    std::vector<SummaryRow> out;
    for (auto& [key, cell] : cells) {
        SummaryRow s;
        s.method = key.first;
        s.n_exp = key.second;
        s.n = static_cast<int>(cell.size());
        std::vector<double> bias, aucs;
        for (const ResultRow* r : cell) {
            bias.push_back(r->mean_abs_bias);
            aucs.push_back(r->auc);
        }
        s.median_bias = median(bias);
        s.mean_bias = std::accumulate(bias.begin(), bias.end(), 0.0) / bias.size();
        s.median_auc = median(aucs);
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const SummaryRow& a, const SummaryRow& b) {
        if (a.n_exp != b.n_exp) return a.n_exp < b.n_exp;
        return a.method < b.method;
    });
    return out;
}

}  // namespace causalmb
