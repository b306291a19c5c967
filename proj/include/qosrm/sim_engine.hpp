// Interval-driven multicore simulation. Each core runs one application in
// fixed-instruction intervals; the simulation always advances to the
// earliest interval boundary, closes that interval against ground truth,
// and (unless the policy is Idle) invokes the resource manager on that core
// to pick a new system-wide setting. Settings changed on other cores take
// effect immediately for the remainder of their running intervals.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qosrm/rm_optimizer.hpp"
#include "qosrm/system.hpp"
#include "qosrm/workload_gen.hpp"

namespace qosrm {

struct OverheadModel {
  /// RM code path length by core count; the entry for the smallest key not
  /// below the core count is used (largest key beyond the table).
  std::map<std::uint32_t, double> rm_instructions{{2, 51e3}, {4, 73e3}, {8, 100e3}};
  double dvfs_time_s = 15e-6;
  double dvfs_energy_j = 3e-6;
  bool resize_drain = true;  // ROB drain of rob / IPC cycles on a core-size change

  double rm_instructions_for(std::uint32_t cores) const;
};

enum class QosBaseline {
  Repredicted,  // baseline time predicted by the same model each interval
  Anchored,     // baseline time from ground truth of the closing interval's phase
};

struct SimConfig {
  SystemParams sys;
  Policy policy = Policy::RM3;
  PerfModel model = PerfModel::M3;
  bool perfect_models = false;  // predictions are ground truth of the next interval
  bool charge_overheads = true;
  OverheadModel overheads;
  bool apply_all = false;  // charge a DVFS transition on every core at every invocation
  QosBaseline qos_baseline = QosBaseline::Repredicted;
  bool record_events = false;
};

struct Violation {
  double time_s = 0.0;
  std::uint32_t core = 0;
  double value = 0.0;  // (T_actual - T_baseline) / T_baseline
};

struct AppMetrics {
  std::string app;
  double energy_j = 0.0;          // intervals up to the target count
  double overhead_energy_j = 0.0;
  double overhead_time_s = 0.0;
  double finish_time_s = 0.0;
  std::uint32_t intervals = 0;    // counted intervals
  std::uint32_t violations = 0;
};

struct BoundaryEvent {
  double time_s = 0.0;
  std::uint32_t core = 0;
  ResourceSetting setting;  // setting for the next interval
};

struct RunMetrics {
  std::vector<AppMetrics> apps;
  double interval_energy_j = 0.0;
  double rm_energy_j = 0.0;
  double dvfs_energy_j = 0.0;
  double resize_energy_j = 0.0;
  double uncore_energy_j = 0.0;
  double total_energy_j = 0.0;
  double end_time_s = 0.0;
  std::uint64_t rm_invocations = 0;
  std::uint64_t fallbacks = 0;
  std::uint64_t dvfs_transitions = 0;
  std::uint64_t resizes = 0;
  std::uint64_t clamped_t0 = 0;
  std::vector<Violation> violations;
  std::vector<BoundaryEvent> events;  // only with record_events

  double overhead_energy_j() const { return rm_energy_j + dvfs_energy_j + resize_energy_j; }
};

/// Simulates one application per core. Throws std::invalid_argument for an
/// empty workload.
RunMetrics run(const std::vector<const AppProfile*>& apps, const SimConfig& config);
RunMetrics run(const Workload& workload, const Library& library, const SimConfig& config);

/// (T_target - T_base) / T_base. Throws std::invalid_argument unless T_base > 0.
double violation_value(double t_actual_target, double t_actual_base);

}  // namespace qosrm
