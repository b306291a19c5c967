#include <stdexcept>
#include <algorithm>
#include <set>

#include "doctest.h"
#include "qosrm/oracles/lru_reference.hpp"
#include "qosrm/workload_gen.hpp"
#include "support.hpp"

using namespace qosrm;
using qosrm::testing::default_library;
using qosrm::testing::default_system;
using qosrm::testing::rel_close;

namespace {

PhaseProfile make_phase(double mpki_top, double decay, double mlp) {
  PhaseProfile p;
  double m = mpki_top;
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
    p.mpki[w] = m;
    m *= decay;
  }
  p.llc_apki = std::max(20.0, mpki_top * 1.5);
  for (auto& row : p.mlp) row.fill(mlp);
  for (auto& row : p.mlp_observed) row.fill(mlp);
  p.ilp_eff = {1.0, 1.0, 1.0};
  return p;
}

CacheGeometry small_geometry() { return CacheGeometry{64, kMaxWays, 64}; }

std::uint64_t misses_after_warmup(const SynthTrace& t, const CacheGeometry& g, std::uint32_t ways) {
  oracles::LruCache cache(g.num_sets, ways, g.block_size_bytes);
  for (std::size_t i = 0; i < t.warmup; ++i) cache.access(t.entries[i].address);
  const std::uint64_t before = cache.misses();
  for (std::size_t i = t.warmup; i < t.entries.size(); ++i) cache.access(t.entries[i].address);
  return cache.misses() - before;
}

Library fake_library(const std::vector<AppCategory>& cats) {
  Library lib;
  for (std::size_t i = 0; i < cats.size(); ++i) {
    AppProfile a;
    a.name = "app" + std::to_string(i);
    lib.apps.push_back(a);
  }
  return lib;
}

bool in_cells(const std::vector<ScenarioCell>& cells, AppCategory a, AppCategory b) {
  return std::any_of(cells.begin(), cells.end(),
                     [&](const ScenarioCell& c) { return c.first == a && c.second == b; });
}

constexpr AppCategory kCsPs{CacheClass::CS, ParClass::PS};
constexpr AppCategory kCsPi{CacheClass::CS, ParClass::PI};
constexpr AppCategory kCiPs{CacheClass::CI, ParClass::PS};
constexpr AppCategory kCiPi{CacheClass::CI, ParClass::PI};

}  // namespace

TEST_CASE("ground truth at the baseline is T0 + T1 + misses / mlp * Lmem") {
  const SystemParams& sys = default_system();
  PhaseProfile p = make_phase(5.0, 0.9, 2.5);
  p.contention_s_per_miss = 1e-9;  // no excess misses at the baseline allocation
  const GroundTruth g = ground_truth(p, sys.baseline, sys);
  const double n = p.instructions;
  const double t_expected = (p.cpi0 + p.cpi_bp + p.cpi_cache) * n / 2.0e9 + p.misses(8) / 2.5 * sys.l_mem_s;
  CHECK(rel_close(g.time_s, t_expected, 1e-12));
  CHECK(rel_close(g.energy_j, g.core_dynamic_j + g.core_static_j + g.memory_j, 1e-12));

  const GroundTruth again = ground_truth(p, sys.baseline, sys);
  CHECK(again.time_s == g.time_s);
  CHECK(again.energy_j == g.energy_j);
}

TEST_CASE("with unit MLP and ILP factors the ground truth equals the M1 prediction") {
  const SystemParams& sys = default_system();
  const PhaseProfile p = make_phase(8.0, 0.85, 1.0);
  const auto settings = std::vector<ResourceSetting>{
      {CoreSize::S, 1.0e9, 2}, {CoreSize::M, 2.0e9, 8}, {CoreSize::L, 3.25e9, 16}, {CoreSize::L, 1.5e9, 5}};
  for (const ResourceSetting& cur : settings) {
    const IntervalStats obs = ground_truth(p, cur, sys).observed;
    for (const ResourceSetting& tgt : settings) {
      const double pred = predict_time(obs, tgt, sys.cores, PerfModel::M1, sys.l_mem_s);
      CHECK(rel_close(pred, ground_truth(p, tgt, sys).time_s, 1e-12));
    }
  }
}

TEST_CASE("doubling frequency halves time when there are no misses") {
  const SystemParams& sys = default_system();
  const PhaseProfile p = make_phase(0.0, 1.0, 1.0);
  for (CoreSize c : kCoreSizes) {
    const double t1 = ground_truth(p, {c, 1.5e9, 8}, sys).time_s;
    const double t2 = ground_truth(p, {c, 3.0e9, 8}, sys).time_s;
    CHECK(rel_close(t2, t1 / 2.0, 1e-12));
  }
}

TEST_CASE("observed counters carry the heuristic leading-miss table and per-core power") {
  const SystemParams& sys = default_system();
  PhaseProfile p = make_phase(6.0, 0.9, 2.0);
  for (auto& row : p.mlp_observed) row.fill(3.0);
  const GroundTruth g = ground_truth(p, {CoreSize::S, 2.5e9, 6}, sys);
  CHECK(rel_close(g.observed.lm(CoreSize::L, 4), p.misses(4) / 3.0, 1e-12));
  CHECK(rel_close(g.observed.avg_mlp, 2.0, 1e-12));
  REQUIRE(g.observed.p_dyn_by_core.has_value());
  CHECK(rel_close((*g.observed.p_dyn_by_core)[0], g.observed.p_dyn_sample, 1e-12));
}

TEST_CASE("categorization rules") {
  CategorySamples cs{1.0, 0.5, 0.45, 1.0, 1.0, 1.0};
  CHECK(categorize(cs).cache == CacheClass::CS);
  CategorySamples ps{0.0, 0.0, 0.0, 1.5, 2.5, 3.5};
  CHECK(categorize(ps).parallelism == ParClass::PS);
  CategorySamples floor{0.1, 0.1, 0.1, 1.0, 1.0, 1.0};
  CHECK(categorize(floor).cache == CacheClass::CI);
  CategorySamples floor_varying{0.9, 0.15, 0.01, 1.0, 1.0, 1.0};
  CHECK(categorize(floor_varying).cache == CacheClass::CI);
  CategorySamples low_l{0.0, 0.0, 0.0, 1.0, 1.4, 1.9};
  CHECK(categorize(low_l).parallelism == ParClass::PI);
  CategorySamples bad{-1.0, 0.0, 0.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(categorize(bad), std::invalid_argument);
  CategorySamples bad_mlp{0.0, 0.0, 0.0, 0.5, 1.0, 1.0};
  CHECK_THROWS_AS(categorize(bad_mlp), std::invalid_argument);
  CHECK(to_string(kCiPs) == "CI-PS");
  CHECK(parse_category("CS-PI") == kCsPi);
  CHECK_FALSE(parse_category("XX-PI").has_value());
}

TEST_CASE("categories are invariant under uniform instruction scaling") {
  const SystemParams& sys = default_system();
  for (const AppProfile& app : default_library().apps) {
    const AppCategory base = categorize(app, sys);
    for (double k : {0.25, 3.0}) {
      AppProfile scaled = app;
      for (PhaseProfile& p : scaled.phases) p.instructions *= k;
      CHECK(categorize(scaled, sys) == base);
    }
  }
}

TEST_CASE("generated library: every app's derived category equals its label") {
  const SystemParams& sys = default_system();
  const Library& lib = default_library();
  CHECK(lib.apps.size() == 27);
  std::array<int, 4> per{};
  for (const AppProfile& app : lib.apps) {
    CHECK_NOTHROW(app.validate());
    const AppCategory c = categorize(app, sys);
    CHECK(to_string(c) == app.label);
    ++per[category_index(c)];
    CHECK(app.phases.size() >= 3);
    CHECK(app.phases.size() <= 8);
  }
  CHECK(per == std::array<int, 4>{5, 7, 7, 8});
}

TEST_CASE("library generation is deterministic in the seed") {
  const SystemParams& sys = default_system();
  LibraryParams small;
  small.apps_per_category = {1, 1, 1, 1};
  const Library a = generate_library(small, 7, sys);
  const Library b = generate_library(small, 7, sys);
  const Library c = generate_library(small, 8, sys);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(to_json(a).dump() != to_json(c).dump());
}

TEST_CASE("scenario construction respects the cell table and is deterministic") {
  const Library& lib = default_library();
  const auto cats = qosrm::testing::library_categories(lib, default_system());
  const ScenarioTable table = default_scenario_table();
  for (Scenario sc : kScenarios) {
    for (std::uint32_t n : {2u, 4u, 8u}) {
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const ScenarioSpec spec{sc, n, seed};
        const Workload w = build_scenario(spec, lib, cats);
        REQUIRE(w.apps.size() == n);
        const Workload again = build_scenario(spec, lib, cats);
        CHECK(again.apps == w.apps);
        for (std::uint32_t k = 0; k < n / 2; ++k) {
          CHECK(in_cells(table[scenario_index(sc)], cats[w.apps[k]], cats[w.apps[k + n / 2]]));
        }
      }
    }
  }
}

TEST_CASE("two-core S3 pairs come from the CI-PS column") {
  const Library& lib = default_library();
  const auto cats = qosrm::testing::library_categories(lib, default_system());
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Workload w = build_scenario({Scenario::S3, 2, seed}, lib, cats);
    CHECK(cats[w.apps[1]] == kCiPs);
    CHECK(cats[w.apps[0]].cache == CacheClass::CI);
  }
}

TEST_CASE("S1 with a single CS-PS app puts it in the second half") {
  const std::vector<AppCategory> cats{kCiPi, kCiPi, kCsPs, kCiPi, kCiPi};
  const Library lib = fake_library(cats);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Workload w = build_scenario({Scenario::S1, 4, seed}, lib, cats);
    CHECK(w.apps[2] == 2);
    CHECK(w.apps[3] == 2);
  }
}

TEST_CASE("scenario construction errors") {
  const std::vector<AppCategory> cats{kCiPi, kCiPi};
  const Library lib = fake_library(cats);
  CHECK_THROWS_AS(build_scenario({Scenario::S1, 2, 1}, lib, cats), std::invalid_argument);
  CHECK_THROWS_AS(build_scenario({Scenario::S4, 3, 1}, lib, cats), std::invalid_argument);
  CHECK_NOTHROW(build_scenario({Scenario::S4, 2, 1}, lib, cats));
}

TEST_CASE("flat zero MPKI trace has no misses after warm-up") {
  const PhaseProfile p = make_phase(0.0, 1.0, 1.0);
  const CacheGeometry g = small_geometry();
  const SynthTrace t = synth_trace(p, 20000, 3, g);
  for (std::uint32_t w : {1u, 2u, 16u}) CHECK(misses_after_warmup(t, g, w) == 0);
}

TEST_CASE("synthetic trace miss counts are within 10% of the MPKI targets") {
  const CacheGeometry g = small_geometry();
  for (double dep : {0.0, 0.3}) {
    PhaseProfile p = make_phase(12.0, 0.86, 1.0);
    p.dep_prob = dep;
    const std::size_t loads = 100000;
    const SynthTrace t = synth_trace(p, loads, 17, g);
    const TraceMeasurement m = measure_trace(t, kDefaultCores, g);
    for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
      const double target = static_cast<double>(loads) * p.mpki[w] / p.llc_apki;
      CHECK(std::abs(m.misses[w] - target) <= 0.10 * target);
      if (dep == 0.0) CHECK(m.misses[w] == static_cast<double>(misses_after_warmup(t, g, w)));
    }
  }
}

TEST_CASE("without dependencies the exact leading misses are ROB-window clusters") {
  const CacheGeometry g = small_geometry();
  const PhaseProfile p = make_phase(10.0, 0.85, 1.0);
  const SynthTrace t = synth_trace(p, 30000, 5, g);
  const TraceMeasurement m = measure_trace(t, kDefaultCores, g);
  for (std::uint32_t w : {1u, 4u, 8u, 16u}) {
    oracles::LruCache cache(g.num_sets, w, g.block_size_bytes);
    std::vector<std::uint64_t> miss_idx;
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
      const bool hit = cache.access(t.entries[i].address);
      if (i >= t.warmup && !hit) miss_idx.push_back(t.entries[i].instruction_index);
    }
    for (CoreSize c : kCoreSizes) {
      const std::uint64_t rob = kDefaultCores[index_of(c)].rob;
      std::uint64_t clusters = 0;
      std::optional<std::uint64_t> lead;
      for (std::uint64_t idx : miss_idx) {
        if (!lead || idx - *lead >= rob) {
          ++clusters;
          lead = idx;
        }
      }
      CHECK(m.lm_oracle[index_of(c)][w] == static_cast<double>(clusters));
    }
  }
}

TEST_CASE("trace generation rejects infeasible curves and is deterministic") {
  PhaseProfile p = make_phase(5.0, 0.9, 1.0);
  p.mpki[9] = 6.0;
  CHECK_THROWS_AS(synth_trace(p, 100, 1, small_geometry()), std::invalid_argument);
  PhaseProfile q = make_phase(5.0, 0.9, 1.0);
  q.llc_apki = 4.0;
  CHECK_THROWS_AS(synth_trace(q, 100, 1, small_geometry()), std::invalid_argument);
  const PhaseProfile r = make_phase(5.0, 0.9, 1.0);
  CHECK(synth_trace(r, 500, 9, small_geometry()).entries == synth_trace(r, 500, 9, small_geometry()).entries);
}

TEST_CASE("profile validation") {
  PhaseProfile p = make_phase(5.0, 0.9, 1.5);
  CHECK_NOTHROW(p.validate());
  PhaseProfile bad_mlp = p;
  bad_mlp.mlp[0][4] = 0.5;
  CHECK_THROWS_AS(bad_mlp.validate(), std::invalid_argument);
  PhaseProfile bad_order = p;
  bad_order.mlp[2][4] = 1.0;  // L below M
  CHECK_THROWS_AS(bad_order.validate(), std::invalid_argument);
  PhaseProfile bad_ilp = p;
  bad_ilp.ilp_eff[2] = 1.5;
  CHECK_THROWS_AS(bad_ilp.validate(), std::invalid_argument);

  AppProfile app = qosrm::testing::single_phase_app(p, "x");
  CHECK_NOTHROW(app.validate());
  app.sequence = {1};
  CHECK_THROWS_AS(app.validate(), std::invalid_argument);
}
