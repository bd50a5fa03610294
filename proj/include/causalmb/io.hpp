#pragma once

#include <string>
#include <vector>

#include "causalmb/evaluation.hpp"
#include "causalmb/fusion.hpp"
#include "causalmb/graph.hpp"
#include "causalmb/identification.hpp"
#include "causalmb/simulation.hpp"

namespace causalmb {

// Graphs. JSON form:
//   {"nodes": [...], "directed": [["A","B"], ...], "bidirected": [...],
//    "treatment": "X", "outcome": "Y", "latent": [...]}
// Text form (one edge per line, nodes inferred in order of appearance,
// '#' comments allowed):
//   A -> B
//   A <-> B
Smcm load_graph(const std::string& path);
Smcm parse_graph_json(const std::string& text);
Smcm parse_graph_text(const std::string& text);
std::string graph_to_json(const Smcm& g);

// Datasets: CSV with a header row of variable names, cells are 0-based
// category indices; a sidecar JSON schema {"name": arity} fixes arities.
DiscreteDataset load_dataset_csv(const std::string& csv_path, const std::string& schema_path,
                                 Provenance provenance);
void save_dataset_csv(const DiscreteDataset& d, const std::string& csv_path);
void save_schema_json(const DiscreteDataset& d, const std::string& schema_path);

// Networks: {"nodes": [...], "arities": {...}, "parents": {...},
//            "cpt": {name: [[row], ...]}, "latent": [...],
//            "treatment": ..., "outcome": ...}
void save_net_json(const DiscreteBayesNet& net, const std::string& path);
DiscreteBayesNet load_net_json(const std::string& path);

// Fused models: committed boundary, hypothesis weights and both count tables
// per hypothesis. Loading reproduces predictions bit-for-bit.
void save_model_json(const FusedModel& m, const std::string& path);
FusedModel load_model_json(const std::string& path);

// Experiment configs (JSON object mirroring ExperimentConfig fields).
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

std::vector<ResultRow> read_results_csv(const std::string& path);
void write_manifest(const ExperimentConfig& cfg, const std::string& path);

std::string cmb_reports_to_json(const Smcm& g, const std::vector<CmbReport>& reports);

inline constexpr const char* kCodeVersion = "causalmb 0.1.0";

}  // namespace causalmb
