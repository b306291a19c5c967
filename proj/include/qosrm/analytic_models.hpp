// Interval performance and energy prediction used by the resource manager.
//
// Predicted time for a target (c, f, w) scales the dispatch-bound part of the
// last interval by the dispatch-width ratio, scales all core time by the
// frequency ratio, and adds the predicted memory stall time:
//
//   T = (T0 * D(c_cur) / D(c) + T1) * f_cur / f + Tmem(c, w)
//
// Tmem is misses(w) * L_mem (M1), misses(w) / MLP_avg * L_mem (M2) or
// LM(c, w) * L_mem (M3).
#pragma once

#include <array>
#include <optional>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qosrm/cache_atd.hpp"
#include "qosrm/core_types.hpp"

namespace qosrm {

struct VfPoint {
  double frequency_hz = 2.0e9;
  double voltage = 1.0;
};

/// Discrete DVFS operating points, ascending in frequency.
class VfTable {
 public:
  /// levels points from f_min in f_step increments; voltage linear between
  /// (f_min_ref, v_min) and (f_max_ref, v_max).
  static VfTable linear_grid(double f_min_hz = 1.0e9, double f_step_hz = 0.25e9,
                             std::size_t levels = 10, double v_at_f_min = 0.8,
                             double v_at_f_max = 1.25);
  /// Throws std::invalid_argument unless frequencies ascend and voltages do
  /// not decrease.
  static VfTable from_points(std::vector<VfPoint> points);

  /// Throws std::out_of_range for a frequency that is not on the grid.
  VfPoint at(double frequency_hz) const;
  std::size_t index_of(double frequency_hz) const;
  double voltage(double frequency_hz) const { return at(frequency_hz).voltage; }

  std::span<const VfPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  explicit VfTable(std::vector<VfPoint> points) : points_(std::move(points)) {}
  std::vector<VfPoint> points_;
};

struct ResourceSetting {
  CoreSize core = CoreSize::M;
  double frequency_hz = 2.0e9;
  std::uint32_t ways = 8;

  friend bool operator==(const ResourceSetting&, const ResourceSetting&) = default;
};

/// Counters observed over one interval on one core.
struct IntervalStats {
  double t_total = 0.0;  // seconds
  double t_bp = 0.0;
  double t_cache = 0.0;
  double t_mem = 0.0;
  double f_current = 2.0e9;
  CoreConfig c_current = kDefaultCores[index_of(CoreSize::M)];
  std::uint32_t w_current = 8;
  double mem_accesses = 0.0;
  /// misses[w] for w = 0..kMaxWays (index 0 unused)
  std::array<double, kMaxWays + 1> miss_curve{};
  /// lm[core][w]
  std::array<std::array<double, kMaxWays + 1>, kNumCoreSizes> lm_table{};
  double avg_mlp = 1.0;
  double p_dyn_sample = 0.0;  // watts
  double v_sample = 1.0;
  /// Dynamic power sampled on each core size at v_sample; when present it
  /// replaces p_dyn_sample for the target core size.
  std::optional<std::array<double, kNumCoreSizes>> p_dyn_by_core;
  double instructions = 0.0;

  double t1() const { return t_bp + t_cache; }
  double misses(std::uint32_t w) const;
  double lm(CoreSize c, std::uint32_t w) const;
};

enum class PerfModel { M1, M2, M3 };

std::string_view to_string(PerfModel m);

/// Clamp events for a derived T0 below zero.
struct ModelDiagnostics {
  std::uint64_t clamped_t0 = 0;
};

/// Predicted time of the next interval at `target`. A negative derived T0 is
/// clamped to zero and counted in `diag`.
double predict_time(const IntervalStats& stats, const ResourceSetting& target,
                    const CoreTable& cores, PerfModel model, double l_mem_s,
                    ModelDiagnostics* diag = nullptr);

bool qos_ok(const IntervalStats& stats, const ResourceSetting& target,
            const ResourceSetting& baseline, double alpha, const CoreTable& cores,
            PerfModel model, double l_mem_s);

/// Static power per core size and DVFS point, plus the V(f) table.
class PowerTables {
 public:
  /// Default grid with k = 0.35 / 0.5 / 0.8 W for S / M / L.
  PowerTables();
  /// Parametric: P_static(c, f) = k(c) * V(f)^2.
  PowerTables(VfTable vf, std::array<double, kNumCoreSizes> static_coeff_w);
  /// Explicit table: static_w[c][i] for the i-th VF point.
  PowerTables(VfTable vf, std::array<std::vector<double>, kNumCoreSizes> static_w);

  /// Throws std::out_of_range when (c, f) has no table entry.
  double static_power(CoreSize c, double frequency_hz) const;
  double voltage(double frequency_hz) const { return vf_.voltage(frequency_hz); }
  const VfTable& vf() const { return vf_; }

 private:
  VfTable vf_;
  std::array<std::vector<double>, kNumCoreSizes> static_w_;
};

/// How sampled dynamic power is carried to a target operating point.
enum class DynPowerScaling {
  Voltage,           // P* V^2 / V*^2
  VoltageFrequency,  // P* V^2 f / (V*^2 f*), switching power at the new clock
};

/// E = [P_dyn(f) + P_static(c, f)] * T + (MA + DM(w)) * e_mem, with
/// DM(w) = misses(w) - misses(w_last) and P_dyn(f) = P* V(f)^2 / V*^2 under
/// Voltage scaling. P* is the target core's entry of p_dyn_by_core when
/// available, else p_dyn_sample.
double predict_energy(const IntervalStats& stats, const ResourceSetting& target,
                      double predicted_time_s, const PowerTables& power, double e_mem_j,
                      std::uint32_t w_last,
                      DynPowerScaling scaling = DynPowerScaling::Voltage);

}  // namespace qosrm
