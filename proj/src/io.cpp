#include "causalmb/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "causalmb/errors.hpp"

namespace causalmb {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw validation_error("cannot write file: " + path);
    out << text;
}

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw validation_error("malformed JSON in " + what);
    return j;
}

// Field access on user-supplied JSON surfaces as a validation error rather
// than a generic exception.
[[noreturn]] void rethrow_as_validation(const char* what, const json::exception& e) {
    throw validation_error(std::string(what) + ": " + e.what());
}

std::vector<std::pair<std::string, std::string>> edge_list(const json& j, const char* key) {
    std::vector<std::pair<std::string, std::string>> edges;
    if (!j.contains(key)) return edges;
    for (const auto& e : j.at(key)) {
        if (!e.is_array() || e.size() != 2)
            throw validation_error(std::string("edge entries under '") + key +
                                   "' must be two-element arrays");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return edges;
}

}  // namespace

Smcm parse_graph_json(const std::string& text) {
    json j = parse_json(text, "graph");
    try {
        std::vector<std::string> nodes;
        for (const auto& n : j.at("nodes")) nodes.push_back(n.get<std::string>());
        std::optional<std::string> treatment, outcome;
        if (j.contains("treatment") && !j["treatment"].is_null())
            treatment = j["treatment"].get<std::string>();
        if (j.contains("outcome") && !j["outcome"].is_null()) outcome = j["outcome"].get<std::string>();
        std::vector<std::string> latent;
        if (j.contains("latent"))
            for (const auto& l : j["latent"]) latent.push_back(l.get<std::string>());
        return Smcm::make(nodes, edge_list(j, "directed"), edge_list(j, "bidirected"), treatment,
                          outcome, latent);
    } catch (const json::exception& e) {
        rethrow_as_validation("graph", e);
    }
}

Smcm parse_graph_text(const std::string& text) {
    std::vector<std::string> nodes;
    auto note_node = [&](const std::string& n) {
        if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
    };
    std::vector<std::pair<std::string, std::string>> directed, bidirected;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string a, op, b;
        if (!(ls >> a)) continue;  // blank line
        if (!(ls >> op >> b))
            throw validation_error("line " + std::to_string(lineno) + ": expected 'A -> B' or 'A <-> B'");
        std::string extra;
        if (ls >> extra)
            throw validation_error("line " + std::to_string(lineno) + ": trailing tokens");
        note_node(a);
        note_node(b);
        if (op == "->")
            directed.emplace_back(a, b);
        else if (op == "<->")
            bidirected.emplace_back(a, b);
        else
            throw validation_error("line " + std::to_string(lineno) + ": unknown edge operator " + op);
    }
    return Smcm::make(nodes, directed, bidirected);
}

Smcm load_graph(const std::string& path) {
    const std::string text = read_file(path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return parse_graph_json(text);
    return parse_graph_text(text);
}

std::string graph_to_json(const Smcm& g) {
    json j;
    j["nodes"] = g.names();
    json directed = json::array(), bidirected = json::array();
    for (auto [u, v] : g.directed_edges()) directed.push_back({g.name(u), g.name(v)});
    for (auto [u, v] : g.bidirected_edges()) bidirected.push_back({g.name(u), g.name(v)});
    j["directed"] = directed;
    j["bidirected"] = bidirected;
    if (g.treatment()) j["treatment"] = g.name(*g.treatment());
    if (g.outcome()) j["outcome"] = g.name(*g.outcome());
    json latent = json::array();
    for (int l : g.latent().to_vector()) latent.push_back(g.name(l));
    j["latent"] = latent;
    return j.dump(2);
}

DiscreteDataset load_dataset_csv(const std::string& csv_path, const std::string& schema_path,
                                 Provenance provenance) {
    json schema = parse_json(read_file(schema_path), "schema");
    if (!schema.is_object()) throw validation_error("schema must be a JSON object of name: arity");

    std::ifstream in(csv_path);
    if (!in) throw validation_error("cannot open file: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw validation_error("empty CSV: " + csv_path);

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.push_back("");
        return out;
    };

    std::vector<Variable> vars;
    for (const std::string& name : split(line)) {
        if (!schema.contains(name))
            throw validation_error("column " + name + " missing from the schema");
        try {
            vars.push_back({name, schema[name].get<int>()});
        } catch (const json::exception& e) {
            rethrow_as_validation("schema", e);
        }
    }
    DiscreteDataset d(vars, provenance);
    std::vector<int> row(vars.size());
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != vars.size())
            throw validation_error(csv_path + ": line " + std::to_string(lineno) +
                                   " has the wrong number of cells");
        for (size_t i = 0; i < cells.size(); ++i) {
            try {
                row[i] = std::stoi(cells[i]);
            } catch (const std::exception&) {
                throw validation_error(csv_path + ": line " + std::to_string(lineno) +
                                       ": non-integer cell '" + cells[i] + "'");
            }
        }
        d.append_row(row);
    }
    return d;
}

void save_dataset_csv(const DiscreteDataset& d, const std::string& csv_path) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw validation_error("cannot write file: " + csv_path);
    for (int i = 0; i < d.n_variables(); ++i) out << (i ? "," : "") << d.variable(i).name;
    out << "\n";
    for (int64_t row = 0; row < d.n_rows(); ++row) {
        for (int i = 0; i < d.n_variables(); ++i)
            out << (i ? "," : "") << static_cast<int>(d.at(row, i));
        out << "\n";
    }
}

void save_schema_json(const DiscreteDataset& d, const std::string& schema_path) {
    json j = json::object();
    for (const auto& v : d.variables()) j[v.name] = v.arity;
    write_file(schema_path, j.dump(2) + "\n");
}

void save_net_json(const DiscreteBayesNet& net, const std::string& path) {
    json j;
    j["nodes"] = net.names();
    json arities = json::object(), parents = json::object(), cpt = json::object();
    for (int i = 0; i < net.n(); ++i) {
        arities[net.name(i)] = net.arity(i);
        json ps = json::array();
        for (int p : net.parents(i)) ps.push_back(net.name(p));
        parents[net.name(i)] = ps;
        cpt[net.name(i)] = net.cpt(i);
    }
    j["arities"] = arities;
    j["parents"] = parents;
    j["cpt"] = cpt;
    json latent = json::array();
    for (int l : net.latent()) latent.push_back(net.name(l));
    j["latent"] = latent;
    if (net.treatment()) j["treatment"] = net.name(*net.treatment());
    if (net.outcome()) j["outcome"] = net.name(*net.outcome());
    write_file(path, j.dump(2) + "\n");
}

DiscreteBayesNet load_net_json(const std::string& path) {
    json j = parse_json(read_file(path), "network");
    try {
        std::vector<std::string> names;
        for (const auto& n : j.at("nodes")) names.push_back(n.get<std::string>());
        auto index_of = [&](const std::string& n) {
            auto it = std::find(names.begin(), names.end(), n);
            if (it == names.end()) throw validation_error("unknown node in network file: " + n);
            return static_cast<int>(it - names.begin());
        };
        const int n = static_cast<int>(names.size());
        std::vector<int> arities(n);
        std::vector<std::vector<int>> parents(n);
        std::vector<std::vector<std::vector<double>>> cpts(n);
        for (int i = 0; i < n; ++i) {
            arities[i] = j.at("arities").at(names[i]).get<int>();
            for (const auto& p : j.at("parents").at(names[i]))
                parents[i].push_back(index_of(p.get<std::string>()));
            cpts[i] = j.at("cpt").at(names[i]).get<std::vector<std::vector<double>>>();
        }
        std::vector<int> latent;
        if (j.contains("latent"))
            for (const auto& l : j["latent"]) latent.push_back(index_of(l.get<std::string>()));
        std::optional<int> treatment, outcome;
        if (j.contains("treatment") && !j["treatment"].is_null())
            treatment = index_of(j["treatment"].get<std::string>());
        if (j.contains("outcome") && !j["outcome"].is_null())
            outcome = index_of(j["outcome"].get<std::string>());
        return DiscreteBayesNet::make(std::move(names), std::move(arities), std::move(parents),
                                      std::move(cpts), std::move(latent), treatment, outcome);
    } catch (const json::exception& e) {
        rethrow_as_validation("network", e);
    }
}

namespace {

json table_to_json(const CountTable& t) {
    json rows = json::array();
    t.for_each_nonzero([&](uint64_t j, const int64_t* row, int64_t) {
        json counts = json::array();
        for (int k = 0; k < t.outcome_arity(); ++k) counts.push_back(row[k]);
        rows.push_back(json::array({j, counts}));
    });
    return rows;
}

CountTable table_from_json(const json& rows, const std::vector<Variable>& z_vars,
                           const Variable& outcome) {
    uint64_t q = 1;
    for (const auto& v : z_vars) q *= static_cast<uint64_t>(v.arity);
    std::vector<std::vector<int64_t>> n_jk(q, std::vector<int64_t>(outcome.arity, 0));
    for (const auto& entry : rows) {
        const uint64_t j = entry.at(0).get<uint64_t>();
        if (j >= q) throw validation_error("model table row index out of range");
        n_jk[j] = entry.at(1).get<std::vector<int64_t>>();
    }
    return CountTable::from_counts(z_vars, outcome, n_jk);
}

}  // namespace

void save_model_json(const FusedModel& m, const std::string& path) {
    json j;
    json vars = json::array();
    for (const auto& v : m.variables()) vars.push_back({{"name", v.name}, {"arity", v.arity}});
    j["variables"] = vars;
    j["treatment"] = m.variables()[m.treatment()].name;
    j["outcome"] = m.variables()[m.outcome()].name;
    json mb = json::array();
    for (int v : m.markov_boundary()) mb.push_back(m.variables()[v].name);
    j["markov_boundary"] = mb;
    j["treatment_forced"] = m.treatment_was_forced();
    j["degraded_enumeration"] = m.degraded_enumeration();
    j["alpha"] = m.prior().alpha_jk;
    j["log_p_obs_given_mb"] = m.log_p_obs_given_mb();
    json hyps = json::array();
    for (size_t h = 0; h < m.weights().size(); ++h) {
        const auto& w = m.weights()[h];
        json jz = json::array();
        for (int v : w.z) jz.push_back(m.variables()[v].name);
        hyps.push_back({{"z", jz},
                        {"flag", w.flag == HypothesisFlag::c ? "c" : "cbar"},
                        {"log_unnormalized", w.log_unnormalized},
                        {"posterior", w.posterior},
                        {"t_obs", table_to_json(m.tables()[h].t_o)},
                        {"t_exp", table_to_json(m.tables()[h].t_e)}});
    }
    j["hypotheses"] = hyps;
    write_file(path, j.dump(2) + "\n");
}

FusedModel load_model_json(const std::string& path) {
    json j = parse_json(read_file(path), "model");
    try {
        std::vector<Variable> vars;
        for (const auto& v : j.at("variables"))
            vars.push_back({v.at("name").get<std::string>(), v.at("arity").get<int>()});
        auto index_of = [&](const std::string& n) {
            for (size_t i = 0; i < vars.size(); ++i)
                if (vars[i].name == n) return static_cast<int>(i);
            throw validation_error("unknown variable in model file: " + n);
        };
        const int x = index_of(j.at("treatment").get<std::string>());
        const int y = index_of(j.at("outcome").get<std::string>());
        std::vector<int> u_star;
        for (const auto& n : j.at("markov_boundary")) u_star.push_back(index_of(n.get<std::string>()));
        std::vector<HypothesisWeight> weights;
        std::vector<FusedModel::HypothesisTables> tables;
        for (const auto& h : j.at("hypotheses")) {
            HypothesisWeight w;
            for (const auto& n : h.at("z")) w.z.push_back(index_of(n.get<std::string>()));
            std::sort(w.z.begin(), w.z.end());
            w.flag = h.at("flag").get<std::string>() == "c" ? HypothesisFlag::c : HypothesisFlag::cbar;
            w.log_unnormalized = h.at("log_unnormalized").get<double>();
            w.posterior = h.at("posterior").get<double>();
            std::vector<Variable> z_vars;
            for (int v : w.z) z_vars.push_back(vars[v]);
            CountTable t_o = table_from_json(h.at("t_obs"), z_vars, vars[y]);
            CountTable t_e = table_from_json(h.at("t_exp"), z_vars, vars[y]);
            weights.push_back(std::move(w));
            tables.push_back({std::move(t_o), std::move(t_e)});
        }
        return FusedModel(vars, x, y, u_star, j.at("treatment_forced").get<bool>(),
                          j.at("degraded_enumeration").get<bool>(),
                          PriorSpec{j.at("alpha").get<double>()},
                          j.at("log_p_obs_given_mb").get<double>(), std::move(weights),
                          std::move(tables));
    } catch (const json::exception& e) {
        rethrow_as_validation("model", e);
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    json j = parse_json(read_file(path), "experiment config");
    try {
        ExperimentConfig cfg;
        if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
        if (j.contains("n_observed")) cfg.n_observed = j["n_observed"].get<int>();
        if (j.contains("n_latent")) cfg.n_latent = j["n_latent"].get<int>();
        if (j.contains("n_obs")) cfg.n_obs = j["n_obs"].get<int64_t>();
        if (j.contains("n_exp")) cfg.n_exp_grid = j["n_exp"].get<std::vector<int>>();
        if (j.contains("n_test")) cfg.n_test = j["n_test"].get<int>();
        if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
        if (j.contains("seed_base")) cfg.seed_base = j["seed_base"].get<uint64_t>();
        if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
        if (j.contains("mean_in_degree")) cfg.mean_in_degree = j["mean_in_degree"].get<double>();
        if (j.contains("arities")) cfg.arity_choices = j["arities"].get<std::vector<int>>();
        if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        rethrow_as_validation("experiment config", e);
    }
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["replications"] = cfg.replications;
    j["n_observed"] = cfg.n_observed;
    j["n_latent"] = cfg.n_latent;
    j["n_obs"] = cfg.n_obs;
    j["n_exp"] = cfg.n_exp_grid;
    j["n_test"] = cfg.n_test;
    j["alpha"] = cfg.alpha;
    j["seed_base"] = cfg.seed_base;
    j["methods"] = cfg.methods;
    j["mean_in_degree"] = cfg.mean_in_degree;
    j["arities"] = cfg.arity_choices;
    j["out_dir"] = cfg.out_dir;
    return j.dump(2);
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) return {};
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        ResultRow r;
        std::getline(ls, cell, ',');
        r.seed = std::stoi(cell);
        std::getline(ls, r.method, ',');
        std::getline(ls, cell, ',');
        r.n_exp = std::stoi(cell);
        std::getline(ls, cell, ',');
        r.mean_abs_bias = std::stod(cell);
        std::getline(ls, cell, ',');
        r.auc = std::stod(cell);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& path) {
    const std::string cfg_json = experiment_config_to_json(cfg);
    // FNV-1a over the canonical config serialization.
    uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : cfg_json) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    json j;
    j["config"] = json::parse(cfg_json);
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    j["config_hash"] = hex;
    j["code_version"] = kCodeVersion;
    std::vector<int> seeds(cfg.replications);
    for (int i = 0; i < cfg.replications; ++i) seeds[i] = i;
    j["seeds"] = seeds;
    write_file(path, j.dump(2) + "\n");
}

std::string cmb_reports_to_json(const Smcm& g, const std::vector<CmbReport>& reports) {
    json out = json::array();
    for (const CmbReport& r : reports) {
        json jr;
        json cand = json::array();
        for (int v : r.candidate.to_vector()) cand.push_back(g.name(v));
        jr["candidate"] = cand;
        jr["is_cmb"] = r.is_cmb;
        if (r.failed_condition) {
            switch (*r.failed_condition) {
                case CmbFailure::not_identifiable: jr["failed_condition"] = "not_identifiable"; break;
                case CmbFailure::redundant_or_identifiable_superset:
                    jr["failed_condition"] = "redundant_or_identifiable_superset";
                    break;
                case CmbFailure::not_minimal: jr["failed_condition"] = "not_minimal"; break;
            }
        }
        if (r.witness) {
            json w = json::array();
            for (int v : r.witness->to_vector()) w.push_back(g.name(v));
            jr["witness"] = w;
        }
        out.push_back(std::move(jr));
    }
    return out.dump(2);
}

}  // namespace causalmb
