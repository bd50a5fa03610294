#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "causalmb/errors.hpp"
#include "causalmb/evaluation.hpp"
#include "causalmb/io.hpp"
#include "causalmb/rng.hpp"
#include "causalmb/simulation.hpp"
#include "support/oracles.hpp"

using namespace causalmb;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("evaluation");

TEST_CASE("mean absolute bias") {
    CHECK(mean_abs_bias({0.2, 0.7, 0.9}, {0.2, 0.7, 0.9}) == 0.0);
    CHECK(mean_abs_bias({0.5, 0.5}, {1.0, 1.0}) == doctest::Approx(0.5));
    Rng rng(3);
    std::vector<double> pred, truth;
    double manual = 0.0;
    for (int i = 0; i < 50; ++i) {
        pred.push_back(rng.next_double());
        truth.push_back(rng.next_double());
        manual += std::abs(pred.back() - truth.back());
    }
    CHECK(mean_abs_bias(pred, truth) == doctest::Approx(manual / 50.0).epsilon(1e-12));
    CHECK_THROWS_AS(mean_abs_bias({0.1}, {0.1, 0.2}), validation_error);
}

TEST_CASE("auc") {
    CHECK(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    CHECK(auc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == doctest::Approx(0.0));
    // five-point case with a tie, against the pairwise oracle
    const std::vector<double> s{0.3, 0.5, 0.5, 0.7, 0.2};
    const std::vector<int> l{0, 1, 0, 1, 1};
    CHECK(auc(s, l) == doctest::Approx(oracle::auc_by_pairs(s, l)).epsilon(1e-12));

    Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < 30; ++i) {
            scores.push_back(static_cast<double>(rng.next_below(8)) / 8.0);
            labels.push_back(static_cast<int>(rng.next_below(2)));
        }
        CHECK(auc(scores, labels) ==
              doctest::Approx(oracle::auc_by_pairs(scores, labels)).epsilon(1e-12));
    }
    CHECK(auc({0.3, 0.4}, {1, 1}) == 0.5);  // degenerate labels: chance level
}

TEST_CASE("signed-rank test conventions") {
    const std::vector<double> same{1.0, 2.0, 3.0, 4.0};
    CHECK(signed_rank_test(same, same) == 1.0);

    // one-sided: a uniformly below b gives a small p, the reverse a large one
    std::vector<double> lo, hi;
    Rng rng(4242);
    for (int i = 0; i < 100; ++i) {
        const double base = rng.next_double();
        lo.push_back(base);
        hi.push_back(base + 0.05 + 0.2 * rng.next_double());
    }
    CHECK(signed_rank_test(lo, hi) < 0.01);
    CHECK(signed_rank_test(hi, lo) > 0.99);

    // exact tail matches the permutation oracle on small samples (with ties)
    for (int rep = 0; rep < 12; ++rep) {
        std::vector<double> a, b;
        const int n = 4 + static_cast<int>(rng.next_below(6));
        for (int i = 0; i < n; ++i) {
            a.push_back(static_cast<double>(rng.next_below(6)) / 4.0);
            b.push_back(static_cast<double>(rng.next_below(6)) / 4.0);
        }
        CHECK(signed_rank_test(a, b) ==
              doctest::Approx(oracle::signed_rank_by_permutation(a, b)).epsilon(1e-10));
    }

    // zero differences are dropped, not counted
    CHECK(signed_rank_test({1.0, 5.0, 5.0}, {2.0, 5.0, 5.0}) ==
          doctest::Approx(oracle::signed_rank_by_permutation({1.0}, {2.0})).epsilon(1e-12));

    // beyond the exact-enumeration range the normal approximation takes over
    std::vector<double> big_lo, big_hi, big_sym_a, big_sym_b;
    for (int i = 0; i < 400; ++i) {
        const double base = rng.next_double();
        big_lo.push_back(base);
        big_hi.push_back(base + 0.02 + 0.1 * rng.next_double());
        big_sym_a.push_back(rng.next_double());
        big_sym_b.push_back(rng.next_double());
    }
    CHECK(signed_rank_test(big_lo, big_hi) < 1e-10);
    CHECK(signed_rank_test(big_hi, big_lo) > 1.0 - 1e-10);
    const double p_sym = signed_rank_test(big_sym_a, big_sym_b);
    CHECK(p_sym > 0.01);
    CHECK(p_sym < 0.99);
}

TEST_CASE("set predictor conditions on its set only") {
    DiscreteDataset d({{"A", 2}, {"X", 2}, {"Y", 2}}, Provenance::observational);
    // Y == X deterministically; A is noise
    Rng rng(10);
    for (int i = 0; i < 200; ++i) {
        const int xv = static_cast<int>(rng.next_below(2));
        d.append_row({static_cast<int>(rng.next_below(2)), xv, xv});
    }
    const SetPredictor p(d, 1, 2, {1}, PriorSpec{}, false);
    const std::vector<double> out = p.predict(1, {0});
    CHECK(out[1] > 0.9);
    CHECK(out[0] + out[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(SetPredictor(d, 1, 2, {0}, PriorSpec{}, false), validation_error);
}

TEST_CASE("baselines select on the right dataset and reject empty input") {
    const DiscreteBayesNet net = random_net(6, 2, 2.0, {2}, 321);
    const DiscreteDataset d_e = sample(net, 0, Intervention{*net.treatment()}, 5);
    const int xi = d_e.index_of("X"), yi = d_e.index_of("Y");
    std::vector<int> covariates;
    for (int i = 0; i < d_e.n_variables(); ++i)
        if (i != xi && i != yi) covariates.push_back(i);
    CHECK_THROWS_AS(baseline_imb_only(d_e, xi, yi, covariates, PriorSpec{}), validation_error);
}

TEST_CASE("baselines approach the exact posterior without confounding") {
    // fully observed net: both baselines are consistent
    const DiscreteBayesNet net = random_net(6, 0, 2.0, {2}, 808);
    const int xn = *net.treatment(), yn = *net.outcome();
    const DiscreteDataset d_o = sample(net, 40000, std::nullopt, 1);
    const DiscreteDataset d_e = sample(net, 40000, Intervention{xn}, 2);
    const DiscreteDataset d_t = sample(net, 200, Intervention{xn}, 3);

    const int x = d_o.index_of("X"), y = d_o.index_of("Y");
    std::vector<int> covariates;
    for (int i = 0; i < d_o.n_variables(); ++i)
        if (i != x && i != y) covariates.push_back(i);

    const SetPredictor omb = baseline_omb_only(d_o, x, y, covariates, PriorSpec{});
    const SetPredictor imb = baseline_imb_only(d_e, x, y, covariates, PriorSpec{});

    std::vector<double> pred_omb, pred_imb, truth;
    for (int64_t r = 0; r < d_t.n_rows(); ++r) {
        std::vector<int> cov(covariates.size());
        std::map<int, int> evidence;
        for (size_t c = 0; c < covariates.size(); ++c) {
            cov[c] = d_t.at(r, covariates[c]);
            evidence[net.index_of(d_t.variable(covariates[c]).name)] = cov[c];
        }
        const int xv = d_t.at(r, x);
        pred_omb.push_back(omb.predict(xv, cov)[1]);
        pred_imb.push_back(imb.predict(xv, cov)[1]);
        truth.push_back(exact_posterior(net, yn, 1, evidence, std::make_pair(xn, xv)));
    }
    CHECK(mean_abs_bias(pred_omb, truth) < 0.02);
    CHECK(mean_abs_bias(pred_imb, truth) < 0.02);
}

TEST_CASE("observational baseline inherits collider bias as strength grows") {
    std::vector<double> biases;
    for (double alpha : {0.6, 0.8, 1.0}) {
        const DiscreteBayesNet net = m_bias_net(alpha);
        const int xn = *net.treatment(), yn = *net.outcome();
        const DiscreteDataset d_o = sample(net, 20000, std::nullopt, 900);
        const DiscreteDataset d_t = sample(net, 400, Intervention{xn}, 901);
        const int x = d_o.index_of("X");
        const std::vector<int> covariates{d_o.index_of("M")};
        const SetPredictor omb =
            baseline_omb_only(d_o, x, d_o.index_of("Y"), covariates, PriorSpec{});
        std::vector<double> pred, truth;
        for (int64_t r = 0; r < d_t.n_rows(); ++r) {
            const int m = d_t.at(r, d_t.index_of("M"));
            const int xv = d_t.at(r, x);
            pred.push_back(omb.predict(xv, {m})[1]);
            truth.push_back(exact_posterior(net, yn, 1, {{net.index_of("M"), m}},
                                            std::make_pair(xn, xv)));
        }
        biases.push_back(mean_abs_bias(pred, truth));
    }
    CHECK(biases[0] < biases[1]);
    CHECK(biases[1] < biases[2]);
}

TEST_CASE("experiment rows, determinism, and persistence") {
    ExperimentConfig cfg;
    cfg.replications = 3;
    cfg.n_observed = 6;
    cfg.n_latent = 2;
    cfg.n_obs = 1500;
    cfg.n_exp_grid = {80};
    cfg.n_test = 60;
    cfg.seed_base = 17;

    const fs::path dir = fs::temp_directory_path() / "causalmb_eval_test";
    fs::remove_all(dir);
    cfg.out_dir = dir.string();

    const std::vector<ResultRow> rows = run_experiment(cfg);
    CHECK(rows.size() == 9);  // seeds x methods x grid
    for (const ResultRow& r : rows) {
        CHECK(r.mean_abs_bias >= 0.0);
        CHECK(r.auc >= 0.0);
        CHECK(r.auc <= 1.0);
    }

    // deterministic artifact: byte-identical results.csv on rerun
    std::ifstream first(dir / "results.csv");
    std::string bytes1((std::istreambuf_iterator<char>(first)), std::istreambuf_iterator<char>());
    fs::remove(dir / "results.csv");
    const std::vector<ResultRow> rows2 = run_experiment(cfg);
    std::ifstream second(dir / "results.csv");
    std::string bytes2((std::istreambuf_iterator<char>(second)), std::istreambuf_iterator<char>());
    CHECK(bytes1 == bytes2);
    CHECK(rows2.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mean_abs_bias == rows2[i].mean_abs_bias);
        CHECK(rows[i].auc == rows2[i].auc);
    }

    // serial and parallel schedules produce the same rows
    cfg.out_dir.clear();
    const std::vector<ResultRow> serial_rows = run_experiment(cfg, ExecMode::serial);
    CHECK(serial_rows.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i)
        CHECK(serial_rows[i].mean_abs_bias == rows[i].mean_abs_bias);

    // resumability: dropping one seed's rows recomputes only that seed and
    // reproduces the artifact byte for byte
    cfg.out_dir = dir.string();
    std::vector<ResultRow> kept = read_results_csv((dir / "results.csv").string());
    std::ofstream trunc(dir / "results.csv", std::ios::trunc);
    trunc << "seed,method,n_exp,mean_abs_bias,auc\n";
    for (const ResultRow& r : kept) {
        if (r.seed == 1) continue;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.12g,%.12g", r.seed, r.method.c_str(), r.n_exp,
                      r.mean_abs_bias, r.auc);
        trunc << buf << "\n";
    }
    trunc.close();
    const std::vector<ResultRow> resumed = run_experiment(cfg);
    CHECK(resumed.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) CHECK(resumed[i].seed == rows[i].seed);
    std::ifstream third(dir / "results.csv");
    std::string bytes3((std::istreambuf_iterator<char>(third)), std::istreambuf_iterator<char>());
    CHECK(bytes3 == bytes1);

    // manifest carries the config hash and the seed list
    std::ifstream mf(dir / "manifest.json");
    std::string manifest((std::istreambuf_iterator<char>(mf)), std::istreambuf_iterator<char>());
    CHECK(manifest.find("config_hash") != std::string::npos);
    CHECK(manifest.find("seeds") != std::string::npos);

    fs::remove_all(dir);
}

TEST_CASE("summaries aggregate per cell") {
    std::vector<ResultRow> rows;
    for (int seed = 0; seed < 4; ++seed) {
        rows.push_back({seed, "findimb", 100, 0.1 * (seed + 1), 0.8, 0.0});
        rows.push_back({seed, "imb_only", 100, 0.2 * (seed + 1), 0.7, 0.0});
    }
    const std::vector<SummaryRow> s = summarize(rows);
    CHECK(s.size() == 2);
    CHECK(s[0].n == 4);
    CHECK(median(metric_column(rows, "findimb", 100)) == doctest::Approx(0.25));
    CHECK(median(metric_column(rows, "imb_only", 100)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(median({}), validation_error);
}

TEST_SUITE_END();
