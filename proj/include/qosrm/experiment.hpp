// Experiment orchestration: builds scenario workloads from the library, runs
// every (workload, policy, model) cell plus the idle reference, and reduces
// the runs to savings tables.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qosrm/config.hpp"
#include "qosrm/qos_eval.hpp"
#include "qosrm/sim_engine.hpp"

namespace qosrm {

struct RunRecord {
  Workload workload;
  std::vector<std::string> app_names;
  Policy policy = Policy::Idle;
  std::string model;  // "M1".."M3", "perfect", or "-" for the idle reference
  RunMetrics metrics;
  double savings = 0.0;  // 1 - E / E(idle) on the same workload

  std::uint64_t counted_violations() const;
};

struct SummaryRow {
  std::uint32_t cores = 2;
  Policy policy = Policy::Idle;
  std::string model;
  std::array<std::optional<double>, 4> mean_savings{};  // per scenario, absent without runs
  std::array<std::uint32_t, 4> runs{};
  /// Scenario weights renormalized over the scenarios present.
  double weighted_savings = 0.0;
  double average_savings = 0.0;  // unweighted mean of scenario means
  std::uint64_t violations = 0;
};

struct Report {
  nlohmann::json config;
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
};

/// Workloads in (core count, scenario, seed) order.
std::vector<Workload> build_workloads(const ExperimentConfig& cfg, const Library& library);

/// Runs are independent and may execute on `parallel` threads; the report
/// does not depend on the thread count.
Report run_experiment(const ExperimentConfig& cfg, const Library& library, unsigned parallel = 1);

/// Recomputes the summary from per-run savings.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs);

nlohmann::json to_json(const RunMetrics& m);
nlohmann::json to_json(const Report& report);
std::string runs_csv(const Report& report);
std::string summary_csv(const Report& report);

/// report.json, runs.csv, summary.csv and violations.csv in `dir`.
void write_report(const Report& report, const std::string& dir);

nlohmann::json to_json(const QosEvalResult& r);
std::string qos_table_csv(const std::vector<QosEvalResult>& results);
/// Per-bin mass, count, and count normalized to the largest bin over all models.
std::string qos_histogram_csv(const std::vector<QosEvalResult>& results);
/// qos_eval.json, qos_eval.csv and qos_histogram.csv in `dir`.
void write_qos_report(const std::vector<QosEvalResult>& results, const nlohmann::json& config,
                      const std::string& dir);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qosrm
