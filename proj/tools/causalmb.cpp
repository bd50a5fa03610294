#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "causalmb/errors.hpp"
#include "causalmb/evaluation.hpp"
#include "causalmb/fusion.hpp"
#include "causalmb/identification.hpp"
#include "causalmb/io.hpp"
#include "causalmb/simulation.hpp"

namespace fs = std::filesystem;
using namespace causalmb;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(csv);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

int parse_int(const std::string& cell, const char* what) {
    try {
        size_t used = 0;
        const int v = std::stoi(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw validation_error(std::string("expected an integer ") + what + ", got '" + cell + "'");
    }
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw validation_error("cannot write file: " + out_path);
        out << text << "\n";
    }
}

struct CmbArgs {
    std::string graph_path, treatment, outcome, out_path;
    bool all = false;
    std::vector<std::string> checks;
};

int run_cmb(const CmbArgs& a) {
    Smcm g = load_graph(a.graph_path);
    if (!g.latent().empty()) g = latent_project(g);
    const int x = g.index_of(a.treatment);
    const int y = g.index_of(a.outcome);

    std::vector<CmbReport> reports;
    if (a.checks.empty()) {
        for (const NodeSet& z : enumerate_cmbs(g, x, y)) reports.push_back(is_cmb(g, x, y, z));
    } else {
        for (const std::string& check : a.checks) {
            NodeSet z(g.n());
            for (const std::string& name : split_names(check)) z.insert(g.index_of(name));
            z.insert(x);  // candidates always contain the treatment
            reports.push_back(is_cmb(g, x, y, z));
        }
    }
    emit(cmb_reports_to_json(g, reports), a.out_path);
    return 0;
}

struct MbArgs {
    std::string data_path, schema_path, outcome, mode = "exhaustive", candidates, out_path;
    double alpha = 1.0;
};

int run_mb(const MbArgs& a) {
    const DiscreteDataset d = load_dataset_csv(a.data_path, a.schema_path, Provenance::observational);
    const int y = d.index_of(a.outcome);
    std::vector<int> candidates;
    if (a.candidates.empty()) {
        for (int i = 0; i < d.n_variables(); ++i)
            if (i != y) candidates.push_back(i);
    } else {
        for (const std::string& name : split_names(a.candidates)) candidates.push_back(d.index_of(name));
    }
    const FgesMode mode = a.mode == "greedy" ? FgesMode::greedy : FgesMode::exhaustive;
    const FgesResult r = fges_mb(d, y, candidates, PriorSpec{a.alpha}, mode);
    std::ostringstream out;
    out << "{\n  \"selected\": [";
    for (size_t i = 0; i < r.selected.size(); ++i)
        out << (i ? ", " : "") << '"' << d.variable(r.selected[i]).name << '"';
    out << "],\n  \"log_score\": " << r.score << "\n}";
    emit(out.str(), a.out_path);
    return 0;
}

struct FindImbArgs {
    std::string obs_path, exp_path, schema_path, treatment, outcome, mode = "exhaustive";
    std::string out_path = "model.json";
    double alpha = 1.0;
};

int run_find_imb(const FindImbArgs& a) {
    const DiscreteDataset d_o = load_dataset_csv(a.obs_path, a.schema_path, Provenance::observational);
    const DiscreteDataset d_e = load_dataset_csv(a.exp_path, a.schema_path, Provenance::experimental);
    const int x = d_o.index_of(a.treatment);
    const int y = d_o.index_of(a.outcome);
    std::vector<int> covariates;
    for (int i = 0; i < d_o.n_variables(); ++i)
        if (i != x && i != y) covariates.push_back(i);
    const FgesMode mode = a.mode == "greedy" ? FgesMode::greedy : FgesMode::exhaustive;
    const FusedModel model = find_imb(d_o, d_e, x, y, covariates, PriorSpec{a.alpha}, mode);
    save_model_json(model, a.out_path);

    std::ostringstream note;
    note << "wrote " << a.out_path << " (boundary:";
    for (int v : model.markov_boundary()) note << " " << d_o.variable(v).name;
    note << ", hypotheses: " << model.weights().size() << ")";
    std::cout << note.str() << "\n";
    return 0;
}

struct PredictArgs {
    std::string model_path, query_path, out_path;
};

int run_predict(const PredictArgs& a) {
    const FusedModel model = load_model_json(a.model_path);
    // The query CSV must assign the treatment and every covariate; arities
    // come from the model itself.
    std::ifstream in(a.query_path);
    if (!in) throw validation_error("cannot open file: " + a.query_path);
    std::string line;
    if (!std::getline(in, line)) throw validation_error("empty query CSV");

    std::vector<std::string> header;
    {
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) header.push_back(cell);
    }
    const auto& vars = model.variables();
    std::vector<int> column_to_var(header.size());
    for (size_t c = 0; c < header.size(); ++c) {
        int found = -1;
        for (size_t v = 0; v < vars.size(); ++v)
            if (vars[v].name == header[c]) found = static_cast<int>(v);
        if (found < 0) throw validation_error("query column not in the model: " + header[c]);
        column_to_var[c] = found;
    }

    std::ostringstream out;
    const std::string yname = vars[model.outcome()].name;
    for (int k = 0; k < model.outcome_arity(); ++k)
        out << (k ? "," : "") << "p_" << yname << "=" << k;
    out << "\n";

    const auto& cov_idx = model.covariate_indices();
    std::map<int, size_t> cov_slot;
    for (size_t s = 0; s < cov_idx.size(); ++s) cov_slot[cov_idx[s]] = s;

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<int> covariate_values(cov_idx.size(), -1);
        int x_val = -1;
        size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            if (c >= column_to_var.size())
                throw validation_error("query line " + std::to_string(lineno) + ": too many cells");
            const int var = column_to_var[c];
            const int value = parse_int(cell, "query cell");
            if (var == model.treatment())
                x_val = value;
            else if (var != model.outcome())
                covariate_values[cov_slot.at(var)] = value;
            ++c;
        }
        if (x_val < 0)
            throw validation_error("query line " + std::to_string(lineno) + ": treatment value missing");
        for (size_t s = 0; s < covariate_values.size(); ++s)
            if (covariate_values[s] < 0)
                throw validation_error("query line " + std::to_string(lineno) + ": missing value for " +
                                       vars[cov_idx[s]].name);
        const std::vector<double> p = model.predict(x_val, covariate_values);
        for (size_t k = 0; k < p.size(); ++k) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.12g", p[k]);
            out << (k ? "," : "") << buf;
        }
        out << "\n";
    }
    if (a.out_path.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream f(a.out_path, std::ios::trunc);
        if (!f) throw validation_error("cannot write file: " + a.out_path);
        f << out.str();
    }
    return 0;
}

struct SimulateArgs {
    int nodes = 10, latent = 5;
    int64_t n_obs = 10000;
    int n_exp = 200, n_test = 400;
    uint64_t seed = 7;
    double mean_in_degree = 2.0;
    std::string arities = "2,3";
    std::string out_dir;
};

int run_simulate(const SimulateArgs& a) {
    std::vector<int> arity_choices;
    for (const std::string& s : split_names(a.arities))
        arity_choices.push_back(parse_int(s, "arity"));
    const DiscreteBayesNet net =
        random_net(a.nodes, a.latent, a.mean_in_degree, arity_choices, a.seed);
    const int x = *net.treatment();
    const int y = *net.outcome();

    const Rng base(a.seed);
    const DiscreteDataset d_o = sample(net, a.n_obs, std::nullopt, base.fork(2).next_u64());
    const DiscreteDataset d_e = sample(net, a.n_exp, Intervention{x}, base.fork(3).next_u64());
    const DiscreteDataset d_t = sample(net, a.n_test, Intervention{x}, base.fork(4).next_u64());

    fs::create_directories(a.out_dir);
    save_net_json(net, a.out_dir + "/net.json");
    save_dataset_csv(d_o, a.out_dir + "/obs.csv");
    save_dataset_csv(d_e, a.out_dir + "/exp.csv");
    save_dataset_csv(d_t, a.out_dir + "/test.csv");
    save_schema_json(d_o, a.out_dir + "/schema.json");

    // Exact post-intervention probabilities for each test row.
    std::ofstream truth(a.out_dir + "/truth.csv", std::ios::trunc);
    if (!truth) throw validation_error("cannot write truth.csv");
    const std::string yname = net.name(y);
    for (int k = 0; k < net.arity(y); ++k) truth << (k ? "," : "") << "p_" << yname << "=" << k;
    truth << "\n";
    const int x_col = d_t.index_of(net.name(x));
    const int y_col = d_t.index_of(yname);
    for (int64_t row = 0; row < d_t.n_rows(); ++row) {
        std::map<int, int> evidence;
        for (int c = 0; c < d_t.n_variables(); ++c) {
            if (c == x_col || c == y_col) continue;
            evidence[net.index_of(d_t.variable(c).name)] = d_t.at(row, c);
        }
        for (int k = 0; k < net.arity(y); ++k) {
            const double p =
                exact_posterior(net, y, k, evidence, std::make_pair(x, static_cast<int>(d_t.at(row, x_col))));
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.12g", p);
            truth << (k ? "," : "") << buf;
        }
        truth << "\n";
    }
    std::cout << "wrote net.json, obs.csv, exp.csv, test.csv, truth.csv, schema.json to "
              << a.out_dir << "\n";
    return 0;
}

struct EvalArgs {
    std::string config_path, out_dir_override;
};

int run_eval(const EvalArgs& a) {
    ExperimentConfig cfg = load_experiment_config(a.config_path);
    if (!a.out_dir_override.empty()) cfg.out_dir = a.out_dir_override;
    const std::vector<ResultRow> rows = run_experiment(cfg);
    for (const SummaryRow& s : summarize(rows)) {
        std::printf("n_exp=%-5d %-9s n=%-4d median_bias=%.4f mean_bias=%.4f median_auc=%.4f\n",
                    s.n_exp, s.method.c_str(), s.n, s.median_bias, s.mean_bias, s.median_auc);
    }
    if (!cfg.out_dir.empty()) std::cout << "rows written to " << cfg.out_dir << "/results.csv\n";
    return 0;
}

struct ReportArgs {
    std::string results_path, out_path;
};

int run_report(const ReportArgs& a) {
    const std::vector<ResultRow> rows = read_results_csv(a.results_path);
    if (rows.empty()) throw validation_error("no result rows in " + a.results_path);
    std::ostringstream out;
    out << "method,n_exp,n,median_bias,mean_bias,median_auc\n";
    std::vector<int> grid;
    for (const SummaryRow& s : summarize(rows)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.6f,%.6f,%.6f", s.method.c_str(), s.n_exp, s.n,
                      s.median_bias, s.mean_bias, s.median_auc);
        out << buf << "\n";
        if (std::find(grid.begin(), grid.end(), s.n_exp) == grid.end()) grid.push_back(s.n_exp);
    }
    std::cout << out.str();

    // Paired one-sided comparisons of the fused method against each baseline.
    for (int ne : grid) {
        const std::vector<double> fused = metric_column(rows, "findimb", ne);
        for (const char* rival : {"imb_only", "omb_only"}) {
            const std::vector<double> other = metric_column(rows, rival, ne);
            if (fused.size() != other.size() || fused.empty()) continue;
            std::printf("signed-rank p (findimb < %s, n_exp=%d): %.3g\n", rival, ne,
                        signed_rank_test(fused, other));
        }
    }
    if (!a.out_path.empty()) {
        std::ofstream f(a.out_path, std::ios::trunc);
        if (!f) throw validation_error("cannot write file: " + a.out_path);
        f << out.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markov boundaries, identifiability, and observational/experimental fusion "
                 "for discrete causal models"};
    app.set_version_flag("--version", kCodeVersion);
    app.require_subcommand(1);

    CmbArgs cmb_args;
    auto* cmb = app.add_subcommand("cmb", "Enumerate or check causal Markov boundaries on a graph");
    cmb->add_option("--graph", cmb_args.graph_path, "Graph file (.json or edge-list text)")->required();
    cmb->add_option("--treatment", cmb_args.treatment)->required();
    cmb->add_option("--outcome", cmb_args.outcome)->required();
    cmb->add_flag("--all", cmb_args.all, "Enumerate all causal Markov boundaries (default)");
    cmb->add_option("--check", cmb_args.checks,
                    "Comma-separated candidate set; repeatable. The treatment is implied.");
    cmb->add_option("--out", cmb_args.out_path, "Write the JSON report list here instead of stdout");

    MbArgs mb_args;
    auto* mb = app.add_subcommand("mb", "Markov-boundary search on a dataset");
    mb->add_option("--data", mb_args.data_path)->required();
    mb->add_option("--schema", mb_args.schema_path)->required();
    mb->add_option("--outcome", mb_args.outcome)->required();
    mb->add_option("--mode", mb_args.mode)->check(CLI::IsMember({"exhaustive", "greedy"}));
    mb->add_option("--candidates", mb_args.candidates, "Comma-separated candidate names (default: all)");
    mb->add_option("--alpha", mb_args.alpha, "Dirichlet pseudo-count per cell");
    mb->add_option("--out", mb_args.out_path);

    FindImbArgs fi_args;
    auto* fi = app.add_subcommand("find-imb", "Fit the fused post-intervention predictor");
    fi->add_option("--obs", fi_args.obs_path)->required();
    fi->add_option("--exp", fi_args.exp_path)->required();
    fi->add_option("--schema", fi_args.schema_path)->required();
    fi->add_option("--treatment", fi_args.treatment)->required();
    fi->add_option("--outcome", fi_args.outcome)->required();
    fi->add_option("--alpha", fi_args.alpha);
    fi->add_option("--mb-mode", fi_args.mode)->check(CLI::IsMember({"exhaustive", "greedy"}));
    fi->add_option("--out", fi_args.out_path, "Model JSON path (default model.json)");

    PredictArgs pr_args;
    auto* pr = app.add_subcommand("predict", "Per-row predictive distributions from a fitted model");
    pr->add_option("--model", pr_args.model_path)->required();
    pr->add_option("--query", pr_args.query_path)->required();
    pr->add_option("--out", pr_args.out_path);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Generate a ground-truth network and datasets");
    sim->add_option("--nodes", sim_args.nodes, "Observed node count (includes treatment and outcome)");
    sim->add_option("--latent", sim_args.latent);
    sim->add_option("--n-obs", sim_args.n_obs);
    sim->add_option("--n-exp", sim_args.n_exp);
    sim->add_option("--n-test", sim_args.n_test);
    sim->add_option("--seed", sim_args.seed);
    sim->add_option("--mean-in-degree", sim_args.mean_in_degree);
    sim->add_option("--arities", sim_args.arities, "Covariate arity choices, e.g. 2,3");
    sim->add_option("--out", sim_args.out_dir)->required();

    EvalArgs ev_args;
    auto* ev = app.add_subcommand("eval", "Run the replication benchmark from a JSON config");
    ev->add_option("--config", ev_args.config_path)->required();
    ev->add_option("--out-dir", ev_args.out_dir_override, "Override the config's output directory");

    ReportArgs rp_args;
    auto* rp = app.add_subcommand("report", "Aggregate a results.csv into summary tables");
    rp->add_option("--results", rp_args.results_path)->required();
    rp->add_option("--out", rp_args.out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmb) return run_cmb(cmb_args);
        if (*mb) return run_mb(mb_args);
        if (*fi) return run_find_imb(fi_args);
        if (*pr) return run_predict(pr_args);
        if (*sim) return run_simulate(sim_args);
        if (*ev) return run_eval(ev_args);
        if (*rp) return run_report(rp_args);
    } catch (const capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const zero_evidence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
