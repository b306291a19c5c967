// Local and global optimization of the resource manager.
//
// Local: for every way count w, pick the (core size, frequency) that meets
// the QoS bound with minimum predicted energy, giving an energy curve E(w)
// with the choices c*(w), f*(w). Global: combine the per-core curves pairwise
// in a balanced tree, each combination a min-plus convolution over the way
// split, then backtrack the splits at the total associativity.
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qosrm/analytic_models.hpp"

namespace qosrm {

enum class Policy { Idle, RM1, RM2, RM3 };

std::string_view to_string(Policy p);
std::optional<Policy> parse_policy(std::string_view name);

struct WayRange {
  std::uint32_t min = 2;
  std::uint32_t max = kMaxWays;
};

struct LocalChoice {
  double energy = 0.0;
  CoreSize core = CoreSize::M;
  double frequency_hz = 0.0;
};

/// E(w) for w in [min_ways, min_ways + entries.size()); nullopt = infeasible.
struct EnergyCurve {
  std::uint32_t min_ways = 2;
  std::vector<std::optional<LocalChoice>> entries;

  std::uint32_t max_ways() const {
    return min_ways + static_cast<std::uint32_t>(entries.size()) - 1;
  }
  const std::optional<LocalChoice>& at(std::uint32_t w) const;
};

/// Energy over a range of way totals; +inf marks infeasible totals.
struct CostCurve {
  std::uint32_t min_ways = 0;
  std::vector<double> cost;

  static constexpr double kInfeasible = std::numeric_limits<double>::infinity();

  std::uint32_t max_ways() const { return min_ways + static_cast<std::uint32_t>(cost.size()) - 1; }
  double at(std::uint32_t w) const;
  bool feasible(std::uint32_t w) const { return at(w) != kInfeasible; }
};

CostCurve to_cost_curve(const EnergyCurve& curve);

/// Result of combining two curves: cost over all totals and the way count
/// given to the left operand for each total.
struct CombinedCurve {
  CostCurve curve;
  std::vector<std::uint32_t> split;  // split[t - curve.min_ways] = w_a
};

/// Counts the entry additions performed by curve combination.
struct OpCounter {
  std::uint64_t additions = 0;
};

/// combined(t) = min over w_a + w_b = t of a(w_a) + b(w_b). Ties go to the
/// smallest w_a; infeasible on both sides propagates.
CombinedCurve combine_curves(const CostCurve& a, const CostCurve& b, OpCounter* ops = nullptr);

struct Allocation {
  std::vector<std::uint32_t> ways;
  std::vector<ResourceSetting> settings;
  double total_energy = 0.0;
  bool fallback = false;  // no feasible allocation existed; baseline even split used
};

/// Minimizes the sum of curve energies subject to sum(w) = total_ways.
/// `baseline` gives the (core, frequency) used, with an even split, when no
/// feasible allocation exists. Among optimal allocations the even split is
/// preferred, then the pairwise smallest-left rule.
Allocation global_optimize(std::span<const EnergyCurve> curves, std::uint32_t total_ways,
                           const ResourceSetting& baseline, OpCounter* ops = nullptr);

struct Prediction {
  double time_s = 0.0;
  double energy_j = 0.0;
};

using SettingPredictor = std::function<Prediction(const ResourceSetting&)>;

/// Admissible (core, frequency) pairs for the policy: RM1 the baseline pair,
/// RM2 every frequency at the baseline core, RM3 all pairs.
std::vector<std::pair<CoreSize, double>> admissible_pairs(Policy policy,
                                                          const ResourceSetting& baseline,
                                                          const VfTable& vf);

/// Builds E(w) from an arbitrary predictor. A setting is admissible when its
/// predicted time does not exceed `qos_limit_s`. Ties keep the lowest core
/// index, then the lowest frequency.
EnergyCurve local_optimize(const SettingPredictor& predict, double qos_limit_s, Policy policy,
                           const ResourceSetting& baseline, const VfTable& vf,
                           WayRange range = {});

/// Analytical model inputs shared by all local optimizations.
struct ModelContext {
  CoreTable cores = kDefaultCores;
  PowerTables power;
  double l_mem_s = 100e-9;
  double e_mem_j = 20e-9;
  double alpha = 1.0;
  WayRange range{};
  DynPowerScaling dyn_scaling = DynPowerScaling::Voltage;
};

/// Model-driven local optimization: times from predict_time and energies
/// from predict_energy; the QoS bound is alpha times the predicted baseline.
EnergyCurve local_optimize(const IntervalStats& stats, Policy policy,
                           const ResourceSetting& baseline, PerfModel model,
                           const ModelContext& ctx, ModelDiagnostics* diag = nullptr);

/// Curve that only admits the baseline setting at w_b (energy 0). Stands in
/// for cores that have not yet reported.
EnergyCurve pinned_curve(const ResourceSetting& baseline, WayRange range = {});

/// Keeps the latest curve of every core and reruns the global optimization
/// whenever one core reports.
class ResourceManager {
 public:
  ResourceManager(std::uint32_t num_cores, std::uint32_t total_ways, ResourceSetting baseline,
                  WayRange range = {});

  /// Replaces the invoking core's curve and returns the new system setting.
  Allocation step(std::uint32_t core, EnergyCurve fresh, OpCounter* ops = nullptr);

  const EnergyCurve& cached_curve(std::uint32_t core) const { return curves_.at(core); }
  std::uint32_t num_cores() const { return static_cast<std::uint32_t>(curves_.size()); }
  std::uint32_t total_ways() const { return total_ways_; }

 private:
  std::uint32_t total_ways_;
  ResourceSetting baseline_;
  std::vector<EnergyCurve> curves_;
};

}  // namespace qosrm
