// Compares the OpenMP kernels against their serial reference paths:
// exhaustive subset scoring, hypothesis enumeration, and the seed-parallel
// replication loop.

#include <chrono>
#include <algorithm>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "causalmb/evaluation.hpp"
#include "causalmb/fusion.hpp"
#include "causalmb/scoring.hpp"
#include "causalmb/simulation.hpp"

using namespace causalmb;

namespace {

template <typename F>
double time_call(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both paths run serially\n");
#endif

    const DiscreteBayesNet net = random_net(12, 4, 2.0, {2, 3}, 99);
    const DiscreteDataset d_o = sample(net, 50000, std::nullopt, 1001);
    const DiscreteDataset d_e = sample(net, 1000, Intervention{*net.treatment()}, 1002);
    const int x = d_o.index_of(net.name(*net.treatment()));
    const int y = d_o.index_of(net.name(*net.outcome()));
    std::vector<int> candidates;
    for (int i = 0; i < d_o.n_variables(); ++i)
        if (i != y) candidates.push_back(i);
    const PriorSpec prior;

    std::vector<double> serial_scores, parallel_scores;
    const double t_serial = time_call([&] {
        serial_scores = exhaustive_subset_scores(d_o, y, candidates, prior, ExecMode::serial);
    });
    const double t_parallel = time_call([&] {
        parallel_scores = exhaustive_subset_scores(d_o, y, candidates, prior, ExecMode::parallel);
    });
    bool equal = serial_scores == parallel_scores;
    std::printf("subset scoring (%zu subsets, %lld rows): serial %.3fs parallel %.3fs speedup %.2fx %s\n",
                serial_scores.size(), static_cast<long long>(d_o.n_rows()), t_serial, t_parallel,
                t_serial / t_parallel, equal ? "(identical)" : "(MISMATCH)");

    std::vector<int> covariates;
    for (int i = 0; i < d_o.n_variables(); ++i)
        if (i != x && i != y) covariates.push_back(i);
    std::vector<int> u_star = covariates;
    u_star.push_back(x);
    if (u_star.size() > 12) u_star.resize(12);
    if (std::find(u_star.begin(), u_star.end(), x) == u_star.end()) u_star.push_back(x);

    std::vector<HypothesisWeight> hw_serial, hw_parallel;
    const double h_serial = time_call([&] {
        hw_serial = hypothesis_posteriors(d_o, d_e, x, y, u_star, prior,
                                          FusionOptions{.exec = ExecMode::serial});
    });
    const double h_parallel = time_call([&] {
        hw_parallel = hypothesis_posteriors(d_o, d_e, x, y, u_star, prior,
                                            FusionOptions{.exec = ExecMode::parallel});
    });
    equal = hw_serial.size() == hw_parallel.size();
    for (size_t i = 0; equal && i < hw_serial.size(); ++i)
        equal = hw_serial[i].posterior == hw_parallel[i].posterior;
    std::printf("hypothesis scoring (%zu hypotheses): serial %.3fs parallel %.3fs speedup %.2fx %s\n",
                hw_serial.size(), h_serial, h_parallel, h_serial / h_parallel,
                equal ? "(identical)" : "(MISMATCH)");

    ExperimentConfig cfg;
    cfg.replications = 8;
    cfg.n_observed = 8;
    cfg.n_latent = 3;
    cfg.n_obs = 4000;
    cfg.n_exp_grid = {200};
    cfg.n_test = 100;
    std::vector<ResultRow> rows_serial, rows_parallel;
    const double e_serial = time_call([&] { rows_serial = run_experiment(cfg, ExecMode::serial); });
    const double e_parallel =
        time_call([&] { rows_parallel = run_experiment(cfg, ExecMode::parallel); });
    equal = rows_serial.size() == rows_parallel.size();
    for (size_t i = 0; equal && i < rows_serial.size(); ++i)
        equal = rows_serial[i].mean_abs_bias == rows_parallel[i].mean_abs_bias;
    std::printf("replication loop (%d seeds): serial %.3fs parallel %.3fs speedup %.2fx %s\n",
                cfg.replications, e_serial, e_parallel, e_serial / e_parallel,
                equal ? "(identical)" : "(MISMATCH)");
    return 0;
}
