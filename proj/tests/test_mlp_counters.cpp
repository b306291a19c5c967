#include <stdexcept>
#include "doctest.h"
#include "qosrm/mlp_counters.hpp"
#include "qosrm/oracles/validate.hpp"
#include "qosrm/rng.hpp"

using namespace qosrm;

namespace {

// Four misses arriving at instruction indices 0, 40, 20, 100; the third
// arrives out of order and so reads as dependent on the first.
constexpr std::uint32_t kFourLoads[] = {0, 40, 20, 100};

std::vector<MissClass> classify(std::uint32_t rob, std::span<const std::uint32_t> idx) {
  LeadingMissCounter c(rob);
  std::vector<MissClass> out;
  for (std::uint32_t i : idx) out.push_back(c.observe(i));
  return out;
}

}  // namespace

TEST_CASE("four-load example: S counts three leading misses and M counts two") {
  using enum MissClass;
  CHECK(classify(64, kFourLoads) == std::vector<MissClass>{Leading, Overlapping, Leading, Leading});
  CHECK(classify(128, kFourLoads) == std::vector<MissClass>{Leading, Overlapping, Leading, Overlapping});

  LmCounterBank bank;
  for (std::uint32_t i : kFourLoads) bank.observe_access(std::nullopt, {i * 64ull, i, true});
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
    CHECK(bank.leading_misses(CoreSize::S, w) == 3);
    CHECK(bank.leading_misses(CoreSize::M, w) == 2);
  }
}

TEST_CASE("a miss at the same instruction index as the last leading miss overlaps") {
  LeadingMissCounter c(128);
  CHECK(c.observe(500) == MissClass::Leading);
  CHECK(c.observe(500) == MissClass::Overlapping);
  CHECK(c.count() == 1);
}

TEST_CASE("misses spaced exactly one ROB apart all lead") {
  for (std::uint32_t rob : {64u, 128u, 256u}) {
    LeadingMissCounter c(rob);
    for (std::uint32_t k = 0; k < 12; ++k) CHECK(c.observe((k * rob) % kInstructionWindow) == MissClass::Leading);
    CHECK(c.count() == 12);
  }
}

TEST_CASE("distance wraps around the instruction window") {
  LeadingMissCounter c(128);
  c.observe(1000);
  CHECK(c.observe(20) == MissClass::Overlapping);  // 44 instructions later
}

TEST_CASE("no misses give zero leading misses; a fitting working set gives zero at full allocation") {
  LmCounterBank bank;
  for (CoreSize s : kCoreSizes) CHECK(bank.leading_misses(s, 4) == 0);

  CoreMonitor mon(CacheGeometry{1, kMaxWays, 64});
  for (std::uint32_t b = 0; b < 8; ++b) mon.access({b * 64ull, b, true});
  mon.reset_counters();
  for (int rep = 0; rep < 10; ++rep) {
    for (std::uint32_t b = 0; b < 8; ++b) mon.access({b * 64ull, (rep * 8 + b) % kInstructionWindow, true});
  }
  for (CoreSize s : kCoreSizes) {
    CHECK(mon.leading_misses(s, kMaxWays) == 0);
    CHECK(mon.leading_misses(s, 8) == 0);
    CHECK(mon.leading_misses(s, 4) > 0);
  }
  CHECK(mon.predicted_misses(kMaxWays) == 0);
}

TEST_CASE("hits feed only the counters of allocations that would miss") {
  LmCounterBank bank;
  bank.observe_access(3u, {0, 0, true});  // hit at position 3: misses for w <= 3
  CHECK(bank.leading_misses(CoreSize::M, 3) == 1);
  CHECK(bank.leading_misses(CoreSize::M, 4) == 0);
  bank.observe_access(std::nullopt, {0, 300, false});  // stores are ignored
  CHECK(bank.leading_misses(CoreSize::M, 16) == 0);
  CHECK_THROWS_AS(bank.observe_miss(CoreSize::M, 0, 1), std::out_of_range);
  CHECK_THROWS_AS(bank.observe_miss(CoreSize::M, 17, 1), std::out_of_range);
  CHECK(bank.counter_count() == kNumCoreSizes * kMaxWays);
}

TEST_CASE("exact overlap model: independent, chained, and the four-load example with a dependency") {
  std::vector<ProgramLoad> indep;
  for (std::uint64_t i = 0; i < 10; ++i) indep.push_back({i * 5, std::nullopt});
  const std::vector<bool> all(10, true);
  CHECK(oracle_leading_misses(indep, 128, all) == 1);

  std::vector<ProgramLoad> chain;
  for (std::uint64_t i = 0; i < 10; ++i) {
    chain.push_back({i * 5, i == 0 ? std::nullopt : std::optional<std::size_t>(i - 1)});
  }
  CHECK(oracle_leading_misses(chain, 128, all) == 10);

  // Program order 0, 20, 40, 100; the load at 20 consumes the load at 0.
  const std::vector<ProgramLoad> four{{0, std::nullopt}, {20, 0}, {40, std::nullopt}, {100, std::nullopt}};
  const std::vector<bool> miss4(4, true);
  CHECK(oracle_leading_misses(four, 64, miss4) == 3);
  CHECK(oracle_leading_misses(four, 128, miss4) == 2);
}

TEST_CASE("exact overlap model: dependencies pass through hits") {
  const std::vector<ProgramLoad> t{{0, std::nullopt}, {10, 0}, {20, 1}};
  CHECK(oracle_leading_misses(t, 128, {true, false, true}) == 2);
  CHECK(oracle_leading_misses(t, 128, {true, false, false}) == 1);
  const std::vector<ProgramLoad> free_hit{{0, std::nullopt}, {10, std::nullopt}, {20, 1}};
  CHECK(oracle_leading_misses(free_hit, 128, {true, false, true}) == 1);
}

TEST_CASE("exact overlap model rejects malformed traces") {
  const std::vector<ProgramLoad> fwd{{0, 1}, {5, std::nullopt}};
  CHECK_THROWS_AS(oracle_leading_misses(fwd, 64, {true, true}), std::invalid_argument);
  const std::vector<ProgramLoad> dec{{10, std::nullopt}, {5, std::nullopt}};
  CHECK_THROWS_AS(oracle_leading_misses(dec, 64, {true, true}), std::invalid_argument);
  const std::vector<ProgramLoad> ok{{0, std::nullopt}};
  CHECK_THROWS_AS(oracle_leading_misses(ok, 64, {true, true}), std::invalid_argument);
}

TEST_CASE("properties: 1 <= LM <= misses, LM non-increasing in ROB size") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const oracles::LmTrace t = oracles::adversarial_trace(128, 1 + rng.index(200), rng);
    std::uint64_t prev = ~0ull;
    for (std::uint32_t rob : {32u, 64u, 128u, 256u}) {
      oracles::LmTrace r = t;
      r.rob = rob;
      const std::uint64_t h = oracles::heuristic_count(r);
      const std::uint64_t o = oracles::oracle_count(r);
      CHECK(h >= 1);
      CHECK(h <= t.program.size());
      CHECK(o >= 1);
      CHECK(o <= t.program.size());
      CHECK(h <= prev);
      prev = h;
    }
  }
}

TEST_CASE("heuristic equals the exact model on traces that respect the arrival assumption") {
  Rng rng(9);
  for (std::uint32_t rob : {64u, 128u, 256u}) {
    for (int trial = 0; trial < 30; ++trial) {
      const oracles::LmTrace t = oracles::arrival_respecting_trace(rob, 1 + rng.index(40), rng);
      CHECK(oracles::heuristic_count(t) == oracles::oracle_count(t));
    }
  }
}

TEST_CASE("after a leading-miss classification the overlap-distance register is empty") {
  Rng rng(31);
  LeadingMissCounter c(128);
  for (int i = 0; i < 5000; ++i) {
    const MissClass k = c.observe(static_cast<std::uint32_t>(rng.index(kInstructionWindow)));
    if (k == MissClass::Leading) CHECK_FALSE(c.last_ov_distance().has_value());
    if (k == MissClass::Overlapping) CHECK(c.last_ov_distance().has_value());
  }
}
