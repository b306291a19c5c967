#include "qosrm/rm_optimizer.hpp"

#include <stdexcept>
#include <string>

namespace qosrm {

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::Idle: return "Idle";
    case Policy::RM1: return "RM1";
    case Policy::RM2: return "RM2";
    case Policy::RM3: return "RM3";
  }
  return "?";
}

std::optional<Policy> parse_policy(std::string_view name) {
  for (Policy p : {Policy::Idle, Policy::RM1, Policy::RM2, Policy::RM3}) {
    if (name == to_string(p)) return p;
  }
  if (name == "idle") return Policy::Idle;
  if (name == "rm1") return Policy::RM1;
  if (name == "rm2") return Policy::RM2;
  if (name == "rm3") return Policy::RM3;
  return std::nullopt;
}

const std::optional<LocalChoice>& EnergyCurve::at(std::uint32_t w) const {
  if (entries.empty() || w < min_ways || w > max_ways()) {
    throw std::out_of_range("way count " + std::to_string(w) + " outside the curve");
  }
  return entries[w - min_ways];
}

double CostCurve::at(std::uint32_t w) const {
  if (cost.empty() || w < min_ways || w > max_ways()) return kInfeasible;
  return cost[w - min_ways];
}

CostCurve to_cost_curve(const EnergyCurve& curve) {
  CostCurve out;
  out.min_ways = curve.min_ways;
  out.cost.reserve(curve.entries.size());
  for (const auto& e : curve.entries) out.cost.push_back(e ? e->energy : CostCurve::kInfeasible);
  return out;
}

CombinedCurve combine_curves(const CostCurve& a, const CostCurve& b, OpCounter* ops) {
  if (a.cost.empty() || b.cost.empty()) throw std::invalid_argument("cannot combine an empty curve");
  CombinedCurve out;
  out.curve.min_ways = a.min_ways + b.min_ways;
  const std::size_t n = a.cost.size() + b.cost.size() - 1;
  out.curve.cost.assign(n, CostCurve::kInfeasible);
  out.split.assign(n, a.min_ways);
  std::uint64_t additions = 0;
  for (std::size_t i = 0; i < a.cost.size(); ++i) {
    for (std::size_t j = 0; j < b.cost.size(); ++j) {
      const double sum = a.cost[i] + b.cost[j];
      ++additions;
      // Strict comparison: the first (smallest) w_a wins ties.
      if (sum < out.curve.cost[i + j]) {
        out.curve.cost[i + j] = sum;
        out.split[i + j] = a.min_ways + static_cast<std::uint32_t>(i);
      }
    }
  }
  if (ops != nullptr) ops->additions += additions;
  return out;
}

namespace {

struct Node {
  CostCurve curve;
  std::vector<std::uint32_t> split;  // empty for leaves
  int left = -1;
  int right = -1;
  int leaf = -1;
};

void assign(const std::vector<Node>& nodes, int id, std::uint32_t total,
            std::vector<std::uint32_t>& ways) {
  const Node& n = nodes[id];
  if (n.leaf >= 0) {
    ways[n.leaf] = total;
    return;
  }
  const std::uint32_t wa = n.split[total - n.curve.min_ways];
  assign(nodes, n.left, wa, ways);
  assign(nodes, n.right, total - wa, ways);
}

// Sums leaf costs in the same association order the tree combined them.
double tree_cost(const std::vector<Node>& nodes, int id, const std::vector<std::uint32_t>& ways) {
  const Node& n = nodes[id];
  if (n.leaf >= 0) return n.curve.at(ways[n.leaf]);
  return tree_cost(nodes, n.left, ways) + tree_cost(nodes, n.right, ways);
}

Allocation even_split(std::size_t cores, std::uint32_t total_ways, const ResourceSetting& baseline) {
  Allocation out;
  out.fallback = true;
  out.ways.assign(cores, total_ways / static_cast<std::uint32_t>(cores));
  for (std::size_t i = 0; i < total_ways % cores; ++i) ++out.ways[i];
  for (std::uint32_t w : out.ways) out.settings.push_back({baseline.core, baseline.frequency_hz, w});
  return out;
}

}  // namespace

Allocation global_optimize(std::span<const EnergyCurve> curves, std::uint32_t total_ways,
                           const ResourceSetting& baseline, OpCounter* ops) {
  if (curves.empty()) throw std::invalid_argument("no curves to optimize");

  std::vector<Node> nodes;
  nodes.reserve(2 * curves.size());
  std::vector<int> level;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    Node leaf;
    leaf.curve = to_cost_curve(curves[i]);
    if (leaf.curve.cost.empty()) return even_split(curves.size(), total_ways, baseline);
    leaf.leaf = static_cast<int>(i);
    nodes.push_back(std::move(leaf));
    level.push_back(static_cast<int>(i));
  }
  while (level.size() > 1) {
    std::vector<int> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      CombinedCurve c = combine_curves(nodes[level[i]].curve, nodes[level[i + 1]].curve, ops);
      Node n;
      n.curve = std::move(c.curve);
      n.split = std::move(c.split);
      n.left = level[i];
      n.right = level[i + 1];
      nodes.push_back(std::move(n));
      next.push_back(static_cast<int>(nodes.size()) - 1);
    }
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
  }

  const Node& root = nodes[level.front()];
  if (!root.curve.feasible(total_ways)) return even_split(curves.size(), total_ways, baseline);

  Allocation out;
  out.ways.assign(curves.size(), 0);
  assign(nodes, level.front(), total_ways, out.ways);
  out.total_energy = root.curve.at(total_ways);
  // An even split that matches the optimum wins the tie.
  const std::vector<std::uint32_t> even = even_split(curves.size(), total_ways, baseline).ways;
  const double even_cost = tree_cost(nodes, level.front(), even);
  if (even_cost <= out.total_energy) {
    out.ways = even;
    out.total_energy = even_cost;
  }
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const LocalChoice& choice = *curves[i].at(out.ways[i]);
    out.settings.push_back({choice.core, choice.frequency_hz, out.ways[i]});
  }
  return out;
}

std::vector<std::pair<CoreSize, double>> admissible_pairs(Policy policy,
                                                          const ResourceSetting& baseline,
                                                          const VfTable& vf) {
  std::vector<std::pair<CoreSize, double>> out;
  switch (policy) {
    case Policy::Idle:
    case Policy::RM1:
      out.emplace_back(baseline.core, baseline.frequency_hz);
      break;
    case Policy::RM2:
      for (const VfPoint& p : vf.points()) out.emplace_back(baseline.core, p.frequency_hz);
      break;
    case Policy::RM3:
      for (CoreSize c : kCoreSizes) {
        for (const VfPoint& p : vf.points()) out.emplace_back(c, p.frequency_hz);
      }
      break;
  }
  return out;
}

EnergyCurve local_optimize(const SettingPredictor& predict, double qos_limit_s, Policy policy,
                           const ResourceSetting& baseline, const VfTable& vf, WayRange range) {
  if (range.min < 1 || range.max > kMaxWays || range.min > range.max) {
    throw std::invalid_argument("invalid way range");
  }
  const auto pairs = admissible_pairs(policy, baseline, vf);
  EnergyCurve curve;
  curve.min_ways = range.min;
  curve.entries.reserve(range.max - range.min + 1);
  for (std::uint32_t w = range.min; w <= range.max; ++w) {
    std::optional<LocalChoice> best;
    for (const auto& [c, f] : pairs) {
      const Prediction p = predict({c, f, w});
      if (p.time_s > qos_limit_s) continue;
      if (!best || p.energy_j < best->energy) best = LocalChoice{p.energy_j, c, f};
    }
    curve.entries.push_back(best);
  }
  return curve;
}

EnergyCurve local_optimize(const IntervalStats& stats, Policy policy,
                           const ResourceSetting& baseline, PerfModel model,
                           const ModelContext& ctx, ModelDiagnostics* diag) {
  const double limit =
      ctx.alpha * predict_time(stats, baseline, ctx.cores, model, ctx.l_mem_s, nullptr);
  const auto predictor = [&](const ResourceSetting& s) {
    Prediction p;
    p.time_s = predict_time(stats, s, ctx.cores, model, ctx.l_mem_s, diag);
    p.energy_j = predict_energy(stats, s, p.time_s, ctx.power, ctx.e_mem_j, stats.w_current, ctx.dyn_scaling);
    return p;
  };
  return local_optimize(predictor, limit, policy, baseline, ctx.power.vf(), ctx.range);
}

EnergyCurve pinned_curve(const ResourceSetting& baseline, WayRange range) {
  if (baseline.ways < range.min || baseline.ways > range.max) {
    throw std::invalid_argument("baseline way count outside the way range");
  }
  EnergyCurve curve;
  curve.min_ways = range.min;
  curve.entries.resize(range.max - range.min + 1);
  curve.entries[baseline.ways - range.min] = LocalChoice{0.0, baseline.core, baseline.frequency_hz};
  return curve;
}

ResourceManager::ResourceManager(std::uint32_t num_cores, std::uint32_t total_ways,
                                 ResourceSetting baseline, WayRange range)
    : total_ways_(total_ways), baseline_(baseline) {
  if (num_cores == 0) throw std::invalid_argument("resource manager needs at least one core");
  curves_.assign(num_cores, pinned_curve(baseline, range));
}

Allocation ResourceManager::step(std::uint32_t core, EnergyCurve fresh, OpCounter* ops) {
  curves_.at(core) = std::move(fresh);
  return global_optimize(curves_, total_ways_, baseline_, ops);
}

}  // namespace qosrm
