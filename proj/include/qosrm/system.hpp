// System-wide constants shared by ground truth, the resource manager and the
// simulator. Defaults describe the S/M/L core family, a 2048-set LLC with
// 8 ways per core, and a 10-point DVFS grid with a 2 GHz / 1 V baseline.
#pragma once

#include <array>
#include <cstdint>

#include "qosrm/analytic_models.hpp"
#include "qosrm/rm_optimizer.hpp"

namespace qosrm {

struct SystemParams {
  CoreTable cores = kDefaultCores;
  VfTable vf = VfTable::linear_grid();
  CacheGeometry geometry{};
  std::uint32_t ways_per_core = 8;  // A = ways_per_core * num_cores
  WayRange way_range{};
  ResourceSetting baseline{CoreSize::M, 2.0e9, 8};
  double alpha = 1.0;

  // Power and memory.
  std::array<double, kNumCoreSizes> static_coeff_w{0.35, 0.5, 0.8};  // W at 1 V
  std::array<double, kNumCoreSizes> epi_ratio{0.85, 1.0, 1.2};      // dynamic energy per instruction vs M
  double stall_power_factor = 0.3;  // clock power while stalled, fraction of busy power
  double l_mem_s = 100e-9;
  double e_mem_j = 20e-9;
  double uncore_power_w = 0.25;
  /// Counters carry the dynamic power of every core size at the current
  /// voltage, as if each size were sampled periodically on the running phase.
  bool per_core_power_sampling = true;
  /// Frequency dependence of dynamic power in the resource manager's model.
  DynPowerScaling dyn_power_scaling = DynPowerScaling::VoltageFrequency;

  // Run length.
  double interval_instructions = 100e6;
  std::uint32_t target_intervals = 100;

  PowerTables power_tables() const { return PowerTables(vf, static_coeff_w); }
  std::uint32_t total_ways(std::uint32_t num_cores) const { return ways_per_core * num_cores; }

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

ModelContext model_context(const SystemParams& sys);

}  // namespace qosrm
