#include <stdexcept>
#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "qosrm/oracles/exhaustive_allocation.hpp"
#include "qosrm/rm_optimizer.hpp"
#include "qosrm/rng.hpp"
#include "qosrm/system.hpp"
#include "support.hpp"

using namespace qosrm;
using qosrm::testing::rel_close;

namespace {

const ResourceSetting kBase{CoreSize::M, 2.0e9, 8};

EnergyCurve curve_from(std::uint32_t min_ways, const std::vector<double>& energies) {
  EnergyCurve c;
  c.min_ways = min_ways;
  for (double e : energies) {
    if (e < 0) {
      c.entries.push_back(std::nullopt);
    } else {
      c.entries.push_back(LocalChoice{e, CoreSize::M, 2.0e9});
    }
  }
  return c;
}

EnergyCurve random_curve(Rng& rng, double infeasible = 0.1) {
  std::vector<double> e;
  for (std::uint32_t w = 2; w <= 16; ++w) e.push_back(rng.bernoulli(infeasible) ? -1.0 : rng.uniform(0.0, 10.0));
  return curve_from(2, e);
}

IntervalStats model_stats(Rng& rng, bool compute_bound = false) {
  IntervalStats s;
  s.f_current = 2.0e9;
  s.c_current = kDefaultCores[index_of(CoreSize::M)];
  s.w_current = 8;
  double m = compute_bound ? 0.0 : rng.uniform(1e5, 1e6);
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
    s.miss_curve[w] = m;
    m *= rng.uniform(0.85, 1.0);
  }
  for (CoreSize c : kCoreSizes) {
    for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
      s.lm_table[index_of(c)][w] = s.miss_curve[w] / (1.0 + index_of(c) * rng.uniform(0.0, 1.0));
    }
  }
  s.t_mem = s.lm(CoreSize::M, 8) * 100e-9;
  s.t_bp = rng.uniform(0.002, 0.01);
  s.t_cache = rng.uniform(0.002, 0.01);
  s.t_total = s.t1() + s.t_mem + rng.uniform(0.02, 0.06);
  s.avg_mlp = 1.5;
  s.mem_accesses = 1e5;
  s.p_dyn_sample = rng.uniform(1.0, 3.0);
  s.v_sample = 1.0;
  return s;
}

}  // namespace

TEST_CASE("toy curve combination: total 4 costs 10 via split (2, 2)") {
  const CostCurve a{1, {10, 6, 5}};
  const CostCurve b{1, {8, 4, 3}};
  const CombinedCurve c = combine_curves(a, b);
  CHECK(c.curve.min_ways == 2);
  CHECK(c.curve.at(4) == 10);
  CHECK(c.split[4 - c.curve.min_ways] == 2);
  CHECK(c.curve.at(2) == 18);
  CHECK(c.curve.at(6) == 8);
}

TEST_CASE("combining with a zero curve gives the constrained minimum of the other") {
  const CostCurve a{2, {9, 4, 7, 3, 8}};
  const CostCurve zero{2, {0, 0, 0}};
  const CombinedCurve c = combine_curves(a, zero);
  for (std::uint32_t t = 4; t <= 10; ++t) {
    double best = CostCurve::kInfeasible;
    for (std::uint32_t wa = 2; wa <= 6; ++wa) {
      if (t - wa >= 2 && t - wa <= 4) best = std::min(best, a.at(wa));
    }
    CHECK(c.curve.at(t) == best);
  }
}

TEST_CASE("ties in curve combination go to the smallest left allocation") {
  const CostCurve a{2, {1, 1, 1}};
  const CostCurve b{2, {1, 1, 1}};
  const CombinedCurve c = combine_curves(a, b);
  CHECK(c.split[6 - c.curve.min_ways] == 2);
  CHECK(c.split[5 - c.curve.min_ways] == 2);
  CHECK(c.split[8 - c.curve.min_ways] == 4);
}

TEST_CASE("infeasible entries propagate through combination") {
  const CostCurve a{1, {CostCurve::kInfeasible, 2}};
  const CostCurve b{1, {CostCurve::kInfeasible, 3}};
  const CombinedCurve c = combine_curves(a, b);
  CHECK_FALSE(c.curve.feasible(2));
  CHECK_FALSE(c.curve.feasible(3));
  CHECK(c.curve.at(4) == 5);
}

TEST_CASE("constant curves give the even split") {
  for (std::uint32_t n : {2u, 4u, 8u}) {
    std::vector<EnergyCurve> curves(n, curve_from(2, std::vector<double>(15, 1.0)));
    const Allocation a = global_optimize(curves, 8 * n, kBase);
    CHECK_FALSE(a.fallback);
    for (std::uint32_t w : a.ways) CHECK(w == 8);
  }
}

TEST_CASE("decreasing against increasing curve pushes to the bound") {
  std::vector<double> dec, inc;
  for (std::uint32_t w = 2; w <= 16; ++w) {
    dec.push_back(100.0 - w);
    inc.push_back(static_cast<double>(w));
  }
  const std::vector<EnergyCurve> curves{curve_from(2, dec), curve_from(2, inc)};
  const Allocation a = global_optimize(curves, 16, kBase);
  CHECK(a.ways == std::vector<std::uint32_t>{14, 2});
}

TEST_CASE("four toy cores match exhaustive enumeration") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EnergyCurve> curves;
    for (int i = 0; i < 4; ++i) curves.push_back(random_curve(rng, 0.2));
    const auto total = static_cast<std::uint32_t>(8 + rng.index(25));
    const Allocation a = global_optimize(curves, total, kBase);
    const oracles::ExhaustiveResult ex = oracles::exhaustive_allocation(curves, total);
    CHECK(a.fallback == !ex.feasible);
    if (ex.feasible) {
      CHECK(rel_close(a.total_energy, ex.total_energy, 1e-12));
      double sum = 0.0;
      for (std::size_t i = 0; i < 4; ++i) sum += curves[i].at(a.ways[i])->energy;
      CHECK(rel_close(sum, ex.total_energy, 1e-12));
    }
  }
}

TEST_CASE("budget conservation and per-core bounds, including the fallback") {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::uint32_t>(1 + rng.index(8));
    std::vector<EnergyCurve> curves;
    for (std::uint32_t i = 0; i < n; ++i) curves.push_back(random_curve(rng, 0.5));
    const std::uint32_t total = 8 * n;
    const Allocation a = global_optimize(curves, total, kBase);
    CHECK(std::accumulate(a.ways.begin(), a.ways.end(), 0u) == total);
    CHECK(a.settings.size() == n);
    for (std::uint32_t w : a.ways) {
      CHECK(w >= 2);
      CHECK(w <= 16);
    }
    if (a.fallback) {
      for (const ResourceSetting& s : a.settings) {
        CHECK(s.core == kBase.core);
        CHECK(s.frequency_hz == kBase.frequency_hz);
      }
    }
  }
  std::vector<EnergyCurve> none(3, curve_from(2, std::vector<double>(15, -1.0)));
  const Allocation fb = global_optimize(none, 24, kBase);
  CHECK(fb.fallback);
  CHECK(fb.ways == std::vector<std::uint32_t>{8, 8, 8});
}

TEST_CASE("curve-entry additions match the balanced-tree count") {
  const auto count = [](std::uint32_t n) {
    std::vector<EnergyCurve> curves(n, curve_from(2, std::vector<double>(15, 1.0)));
    OpCounter ops;
    global_optimize(curves, 8 * n, kBase, &ops);
    return ops.additions;
  };
  // 15-entry leaves; each merge costs |a| * |b|.
  CHECK(count(2) == 15 * 15);
  CHECK(count(4) == 2 * 15 * 15 + 29 * 29);
  CHECK(count(8) == 4 * 15 * 15 + 2 * 29 * 29 + 57 * 57);
}

TEST_CASE("RM1 keeps the baseline core and frequency whenever QoS holds") {
  const VfTable vf = VfTable::linear_grid();
  const auto predictor = [](const ResourceSetting& s) { return Prediction{1.0, 0.5 + s.ways * 0.01}; };
  const EnergyCurve c = local_optimize(predictor, 1.0, Policy::RM1, kBase, vf);
  CHECK(c.min_ways == 2);
  CHECK(c.max_ways() == 16);
  for (std::uint32_t w = 2; w <= 16; ++w) {
    REQUIRE(c.at(w).has_value());
    CHECK(c.at(w)->frequency_hz == kBase.frequency_hz);
    CHECK(c.at(w)->core == kBase.core);
  }
  CHECK(admissible_pairs(Policy::RM2, kBase, vf).size() == vf.size());
  CHECK(admissible_pairs(Policy::RM3, kBase, vf).size() == 3 * vf.size());
}

TEST_CASE("compute-bound stats give the same RM3 choice at every allocation") {
  Rng rng(5);
  const ModelContext ctx = model_context(SystemParams{});
  for (int trial = 0; trial < 20; ++trial) {
    const IntervalStats s = model_stats(rng, true);
    const EnergyCurve c = local_optimize(s, Policy::RM3, kBase, PerfModel::M3, ctx);
    REQUIRE(c.at(2).has_value());
    for (std::uint32_t w = 3; w <= 16; ++w) {
      REQUIRE(c.at(w).has_value());
      CHECK(c.at(w)->core == c.at(2)->core);
      CHECK(c.at(w)->frequency_hz == c.at(2)->frequency_hz);
      CHECK(c.at(w)->energy == c.at(2)->energy);
    }
  }
}

TEST_CASE("model-driven local optimization equals brute force on a three-point grid") {
  Rng rng(21);
  const VfTable vf = VfTable::from_points({{1.5e9, 0.9}, {2.0e9, 1.0}, {3.0e9, 1.2}});
  ModelContext ctx;
  ctx.power = PowerTables(vf, {0.35, 0.5, 0.8});
  for (PerfModel model : {PerfModel::M1, PerfModel::M2, PerfModel::M3}) {
    for (Policy policy : {Policy::RM1, Policy::RM2, Policy::RM3}) {
      for (int trial = 0; trial < 10; ++trial) {
        const IntervalStats s = model_stats(rng);
        const EnergyCurve c = local_optimize(s, policy, kBase, model, ctx);
        const double limit = predict_time(s, kBase, kDefaultCores, model, ctx.l_mem_s);
        for (std::uint32_t w = 2; w <= 16; ++w) {
          std::optional<LocalChoice> best;
          for (CoreSize core : kCoreSizes) {
            if (policy != Policy::RM3 && core != kBase.core) continue;
            for (const VfPoint& p : vf.points()) {
              if (policy == Policy::RM1 && p.frequency_hz != kBase.frequency_hz) continue;
              const ResourceSetting t{core, p.frequency_hz, w};
              const double time = predict_time(s, t, kDefaultCores, model, ctx.l_mem_s);
              if (time > limit) continue;
              const double e = predict_energy(s, t, time, ctx.power, ctx.e_mem_j, s.w_current);
              if (!best || e < best->energy) best = LocalChoice{e, core, p.frequency_hz};
            }
          }
          REQUIRE(best.has_value() == c.at(w).has_value());
          if (best) {
            CHECK(best->energy == c.at(w)->energy);
            CHECK(best->core == c.at(w)->core);
            CHECK(best->frequency_hz == c.at(w)->frequency_hz);
          }
        }
      }
    }
  }
}

TEST_CASE("predicted dominance: RM3 <= RM2 <= RM1 at the optimum") {
  Rng rng(33);
  const ModelContext ctx = model_context(SystemParams{});
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<std::uint32_t>(2 << rng.index(3));
    std::vector<IntervalStats> stats;
    for (std::uint32_t i = 0; i < n; ++i) stats.push_back(model_stats(rng));
    double prev = std::numeric_limits<double>::infinity();
    for (Policy p : {Policy::RM1, Policy::RM2, Policy::RM3}) {
      std::vector<EnergyCurve> curves;
      for (const IntervalStats& s : stats) curves.push_back(local_optimize(s, p, kBase, PerfModel::M3, ctx));
      const Allocation a = global_optimize(curves, 8 * n, kBase);
      REQUIRE_FALSE(a.fallback);
      CHECK(a.total_energy <= prev);
      prev = a.total_energy;
    }
  }
}

TEST_CASE("resource manager: single core, stale cache, fixed point") {
  Rng rng(44);
  const ModelContext ctx = model_context(SystemParams{});

  ResourceManager single(1, 8, kBase);
  const EnergyCurve c0 = local_optimize(model_stats(rng), Policy::RM3, kBase, PerfModel::M3, ctx);
  const Allocation a1 = single.step(0, c0);
  CHECK(a1.ways == std::vector<std::uint32_t>{8});
  CHECK(a1.settings[0].core == c0.at(8)->core);
  CHECK(a1.settings[0].frequency_hz == c0.at(8)->frequency_hz);

  ResourceManager rm(2, 16, kBase);
  const EnergyCurve fresh1 = local_optimize(model_stats(rng), Policy::RM3, kBase, PerfModel::M3, ctx);
  const EnergyCurve fresh2 = local_optimize(model_stats(rng), Policy::RM3, kBase, PerfModel::M3, ctx);
  rm.step(1, fresh2);
  const Allocation got = rm.step(0, fresh1);
  const std::vector<EnergyCurve> both{fresh1, fresh2};
  const Allocation want = global_optimize(both, 16, kBase);
  CHECK(got.ways == want.ways);
  CHECK(got.settings == want.settings);
  CHECK(got.total_energy == want.total_energy);
  const Allocation again = rm.step(0, fresh1);
  CHECK(again.ways == got.ways);
  CHECK(again.settings == got.settings);

  // Before core 1 reports, it is pinned to the baseline.
  ResourceManager fresh_rm(2, 16, kBase);
  const Allocation first = fresh_rm.step(0, fresh1);
  CHECK(first.ways[1] == 8);
  CHECK(first.settings[1] == kBase);
}

TEST_CASE("policy names") {
  CHECK(parse_policy("RM2") == Policy::RM2);
  CHECK(parse_policy("idle") == Policy::Idle);
  CHECK_FALSE(parse_policy("RM4").has_value());
  CHECK(to_string(Policy::RM3) == "RM3");
  CHECK_THROWS_AS(pinned_curve({CoreSize::M, 2e9, 1}), std::invalid_argument);
}
