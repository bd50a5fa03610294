#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "causalmb/errors.hpp"
#include "causalmb/fusion.hpp"
#include "causalmb/io.hpp"
#include "causalmb/simulation.hpp"
#include "support/test_graphs.hpp"

using namespace causalmb;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    const fs::path p = fs::temp_directory_path() / "causalmb_io_test";
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("graph json round trip") {
    const Smcm g = testgraphs::twin_boundary();
    const Smcm back = parse_graph_json(graph_to_json(g));
    CHECK(back.names() == g.names());
    CHECK(back.directed_edges() == g.directed_edges());
    CHECK(back.bidirected_edges() == g.bidirected_edges());
    CHECK(back.treatment() == g.treatment());
    CHECK(back.outcome() == g.outcome());
}

TEST_CASE("graph json keeps latent marks") {
    const Smcm g = Smcm::make({"L", "X", "Y"}, {{"L", "X"}, {"L", "Y"}, {"X", "Y"}}, {}, "X", "Y",
                              {"L"});
    const Smcm back = parse_graph_json(graph_to_json(g));
    CHECK(back.latent().contains(back.index_of("L")));
    CHECK_THROWS_AS(parse_graph_json("{\"nodes\": 3}"), validation_error);
}

TEST_CASE("graph text form") {
    const Smcm g = parse_graph_text("# hand-authored\nX -> Y\nX <-> A\nA <-> B\nB <-> Y\n");
    CHECK(g.n() == 4);
    CHECK(g.has_directed(g.index_of("X"), g.index_of("Y")));
    CHECK(g.has_bidirected(g.index_of("A"), g.index_of("B")));
    CHECK_THROWS_AS(parse_graph_text("X => Y\n"), validation_error);
    CHECK_THROWS_AS(parse_graph_text("X ->\n"), validation_error);
}

TEST_CASE("dataset csv and schema round trip") {
    const fs::path dir = scratch();
    const DiscreteBayesNet net = random_net(5, 1, 2.0, {2, 3}, 42);
    const DiscreteDataset d = sample(net, 200, std::nullopt, 7);
    save_dataset_csv(d, (dir / "d.csv").string());
    save_schema_json(d, (dir / "s.json").string());
    const DiscreteDataset back =
        load_dataset_csv((dir / "d.csv").string(), (dir / "s.json").string(),
                         Provenance::observational);
    CHECK(back.same_schema(d));
    CHECK(back.n_rows() == d.n_rows());
    for (int v = 0; v < d.n_variables(); ++v) CHECK(back.column(v) == d.column(v));

    // out-of-range cells are rejected against the schema
    std::ofstream bad(dir / "bad.csv");
    bad << d.variable(0).name;
    for (int v = 1; v < d.n_variables(); ++v) bad << "," << d.variable(v).name;
    bad << "\n9";
    for (int v = 1; v < d.n_variables(); ++v) bad << ",0";
    bad << "\n";
    bad.close();
    CHECK_THROWS_AS(load_dataset_csv((dir / "bad.csv").string(), (dir / "s.json").string(),
                                     Provenance::observational),
                    validation_error);
}

TEST_CASE("network json round trip reproduces samples") {
    const fs::path dir = scratch();
    const DiscreteBayesNet net = random_net(7, 3, 2.0, {2, 3}, 4711);
    save_net_json(net, (dir / "net.json").string());
    const DiscreteBayesNet back = load_net_json((dir / "net.json").string());
    CHECK(back.names() == net.names());
    const DiscreteDataset a = sample(net, 300, std::nullopt, 5);
    const DiscreteDataset b = sample(back, 300, std::nullopt, 5);
    for (int v = 0; v < a.n_variables(); ++v) CHECK(a.column(v) == b.column(v));
}

TEST_CASE("model json round trip reproduces predictions bitwise") {
    const fs::path dir = scratch();
    const DiscreteBayesNet net = random_net(6, 2, 2.0, {2}, 2025);
    const DiscreteDataset d_o = sample(net, 3000, std::nullopt, 1);
    const DiscreteDataset d_e = sample(net, 200, Intervention{*net.treatment()}, 2);
    const int x = d_o.index_of("X"), y = d_o.index_of("Y");
    std::vector<int> covariates;
    for (int i = 0; i < d_o.n_variables(); ++i)
        if (i != x && i != y) covariates.push_back(i);
    const FusedModel m = find_imb(d_o, d_e, x, y, covariates, PriorSpec{});
    save_model_json(m, (dir / "m.json").string());
    const FusedModel back = load_model_json((dir / "m.json").string());

    CHECK(back.markov_boundary() == m.markov_boundary());
    CHECK(back.weights().size() == m.weights().size());
    std::vector<int> cov(covariates.size(), 0);
    for (int xv = 0; xv < 2; ++xv) {
        const std::vector<double> p1 = m.predict(xv, cov);
        const std::vector<double> p2 = back.predict(xv, cov);
        CHECK(p1 == p2);
    }
}

TEST_CASE("experiment config json") {
    const fs::path dir = scratch();
    ExperimentConfig cfg;
    cfg.replications = 5;
    cfg.n_exp_grid = {10, 20};
    cfg.out_dir = "somewhere";
    std::ofstream f(dir / "cfg.json");
    f << experiment_config_to_json(cfg);
    f.close();
    const ExperimentConfig back = load_experiment_config((dir / "cfg.json").string());
    CHECK(back.replications == 5);
    CHECK(back.n_exp_grid == std::vector<int>{10, 20});
    CHECK(back.out_dir == "somewhere");

    std::ofstream g(dir / "bad.json");
    g << "{\"replications\": 0}";
    g.close();
    CHECK_THROWS_AS(load_experiment_config((dir / "bad.json").string()), validation_error);
}

TEST_SUITE_END();
