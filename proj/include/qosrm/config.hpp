// Experiment configuration and library persistence.
//
// A configuration is one JSON document:
//
//   {
//     "system":    { ...SystemParams fields... },
//     "workloads": { "library": {...}, "scenarios": [...], "cores": [...],
//                    "scenario_table": {...} },
//     "policies":  ["Idle", "RM1", "RM2", "RM3"],
//     "models":    ["M1", "M2", "M3"],
//     "seeds":     [1, 2, 3],
//     "overrides": { "perfect_models": false, ... }
//   }
//
// Every section and field is optional; omitted fields keep their defaults.
// Unknown keys are rejected so that typos do not silently fall back.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qosrm/qos_eval.hpp"
#include "qosrm/sim_engine.hpp"
#include "qosrm/workload_gen.hpp"

namespace qosrm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LibrarySource {
  std::optional<std::string> path;  // load from JSON instead of generating
  std::uint64_t seed = 42;
  LibraryParams params;
};

struct ExperimentConfig {
  SystemParams sys;
  LibrarySource library;
  std::vector<Scenario> scenarios{kScenarios.begin(), kScenarios.end()};
  std::vector<std::uint32_t> core_counts{2};
  ScenarioTable scenario_table = default_scenario_table();
  std::vector<Policy> policies{Policy::Idle, Policy::RM1, Policy::RM2, Policy::RM3};
  std::vector<PerfModel> models{PerfModel::M1, PerfModel::M2, PerfModel::M3};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  // overrides
  bool perfect_models = false;
  std::optional<bool> charge_overheads;  // default: on unless perfect_models
  bool apply_all = false;
  QosBaseline qos_baseline = QosBaseline::Repredicted;
  OverheadModel overheads;
  HistogramSpec histogram;

  bool overheads_enabled() const { return charge_overheads.value_or(!perfect_models); }
  SimConfig sim_config(Policy policy, PerfModel model) const;

  /// Throws ConfigError: no policy, no model, no seed, no scenario or core
  /// count, an odd core count, or invalid system parameters.
  void validate() const;
};

/// Throws ConfigError with the offending key on malformed input.
ExperimentConfig parse_config(const nlohmann::json& doc);
/// Reads `path` (empty: all defaults), applies the assignments, parses.
/// A relative library path is resolved against the config file's directory.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& assignments = {});
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Applies "a.b.c=value" assignments to a config document before parsing.
/// The value is read as JSON, or taken as a string if it is not valid JSON.
void apply_assignment(nlohmann::json& doc, const std::string& assignment);

nlohmann::json to_json(const Library& library);
Library library_from_json(const nlohmann::json& doc);
void save_library(const std::string& path, const Library& library);
Library load_library(const std::string& path);

/// Loads or generates the configured library. Throws ConfigError when the
/// library is empty.
Library resolve_library(const ExperimentConfig& cfg);

}  // namespace qosrm
