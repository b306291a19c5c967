#include "qosrm/analytic_models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qosrm {
namespace {

bool same_frequency(double a, double b) { return std::abs(a - b) <= 1e-6 * std::abs(b); }

}  // namespace

VfTable VfTable::linear_grid(double f_min_hz, double f_step_hz, std::size_t levels,
                             double v_at_f_min, double v_at_f_max) {
  if (levels == 0 || f_min_hz <= 0.0 || (levels > 1 && f_step_hz <= 0.0)) {
    throw std::invalid_argument("invalid frequency grid");
  }
  const double f_max = f_min_hz + f_step_hz * static_cast<double>(levels - 1);
  std::vector<VfPoint> points;
  points.reserve(levels);
  for (std::size_t i = 0; i < levels; ++i) {
    const double f = f_min_hz + f_step_hz * static_cast<double>(i);
    const double v = levels == 1 ? v_at_f_min
                                 : v_at_f_min + (v_at_f_max - v_at_f_min) * (f - f_min_hz) /
                                                    (f_max - f_min_hz);
    points.push_back({f, v});
  }
  return from_points(std::move(points));
}

VfTable VfTable::from_points(std::vector<VfPoint> points) {
  if (points.empty()) throw std::invalid_argument("empty VF table");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].frequency_hz <= 0.0 || points[i].voltage <= 0.0) {
      throw std::invalid_argument("VF points must be positive");
    }
    if (i > 0 && (points[i].frequency_hz <= points[i - 1].frequency_hz ||
                  points[i].voltage < points[i - 1].voltage)) {
      throw std::invalid_argument("VF table must ascend in frequency with non-decreasing voltage");
    }
  }
  return VfTable(std::move(points));
}

std::size_t VfTable::index_of(double frequency_hz) const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (same_frequency(frequency_hz, points_[i].frequency_hz)) return i;
  }
  throw std::out_of_range("frequency " + std::to_string(frequency_hz) + " Hz is not on the grid");
}

VfPoint VfTable::at(double frequency_hz) const { return points_[index_of(frequency_hz)]; }

double IntervalStats::misses(std::uint32_t w) const {
  if (w < 1 || w > kMaxWays) throw std::out_of_range("way count outside [1, 16]");
  return miss_curve[w];
}

double IntervalStats::lm(CoreSize c, std::uint32_t w) const {
  if (w < 1 || w > kMaxWays) throw std::out_of_range("way count outside [1, 16]");
  return lm_table[index_of(c)][w];
}

std::string_view to_string(PerfModel m) {
  switch (m) {
    case PerfModel::M1: return "M1";
    case PerfModel::M2: return "M2";
    case PerfModel::M3: return "M3";
  }
  return "?";
}

double predict_time(const IntervalStats& stats, const ResourceSetting& target,
                    const CoreTable& cores, PerfModel model, double l_mem_s,
                    ModelDiagnostics* diag) {
  const double t1 = stats.t1();
  double t0 = stats.t_total - t1 - stats.t_mem;
  if (t0 < 0.0) {
    t0 = 0.0;
    if (diag != nullptr) ++diag->clamped_t0;
  }
  const double d_cur = stats.c_current.dispatch_width;
  const double d_tgt = cores[index_of(target.core)].dispatch_width;
  const double core_time = (t0 * d_cur / d_tgt + t1) * stats.f_current / target.frequency_hz;

  double t_mem = 0.0;
  switch (model) {
    case PerfModel::M1:
      t_mem = stats.misses(target.ways) * l_mem_s;
      break;
    case PerfModel::M2:
      t_mem = stats.misses(target.ways) / stats.avg_mlp * l_mem_s;
      break;
    case PerfModel::M3:
      t_mem = stats.lm(target.core, target.ways) * l_mem_s;
      break;
  }
  return core_time + t_mem;
}

bool qos_ok(const IntervalStats& stats, const ResourceSetting& target,
            const ResourceSetting& baseline, double alpha, const CoreTable& cores,
            PerfModel model, double l_mem_s) {
  return predict_time(stats, target, cores, model, l_mem_s) <=
         predict_time(stats, baseline, cores, model, l_mem_s) * alpha;
}

PowerTables::PowerTables() : PowerTables(VfTable::linear_grid(), {0.35, 0.5, 0.8}) {}

PowerTables::PowerTables(VfTable vf, std::array<double, kNumCoreSizes> static_coeff_w)
    : vf_(std::move(vf)) {
  for (CoreSize c : kCoreSizes) {
    auto& row = static_w_[index_of(c)];
    row.reserve(vf_.size());
    for (const VfPoint& p : vf_.points()) {
      row.push_back(static_coeff_w[index_of(c)] * p.voltage * p.voltage);
    }
  }
}

PowerTables::PowerTables(VfTable vf, std::array<std::vector<double>, kNumCoreSizes> static_w)
    : vf_(std::move(vf)), static_w_(std::move(static_w)) {}

double PowerTables::static_power(CoreSize c, double frequency_hz) const {
  const std::size_t i = vf_.index_of(frequency_hz);
  const auto& row = static_w_[index_of(c)];
  if (i >= row.size()) {
    throw std::out_of_range("no static power entry for core " + std::string(to_string(c)) +
                            " at " + std::to_string(frequency_hz) + " Hz");
  }
  return row[i];
}

double predict_energy(const IntervalStats& stats, const ResourceSetting& target,
                      double predicted_time_s, const PowerTables& power, double e_mem_j,
                      std::uint32_t w_last, DynPowerScaling scaling) {
  const double v = power.voltage(target.frequency_hz);
  const double sample =
      stats.p_dyn_by_core ? (*stats.p_dyn_by_core)[index_of(target.core)] : stats.p_dyn_sample;
  double p_dyn = sample * (v * v) / (stats.v_sample * stats.v_sample);
  if (scaling == DynPowerScaling::VoltageFrequency) p_dyn *= target.frequency_hz / stats.f_current;
  const double p_static = power.static_power(target.core, target.frequency_hz);
  const double delta_misses = stats.misses(target.ways) - stats.misses(w_last);
  return (p_dyn + p_static) * predicted_time_s + (stats.mem_accesses + delta_misses) * e_mem_j;
}

}  // namespace qosrm
