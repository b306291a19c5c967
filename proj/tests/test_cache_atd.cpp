#include <stdexcept>
#include <sstream>

#include "doctest.h"
#include "qosrm/cache_atd.hpp"
#include "qosrm/oracles/lru_reference.hpp"
#include "qosrm/rng.hpp"
#include "qosrm/trace_io.hpp"

using namespace qosrm;

namespace {

CacheGeometry one_set(std::uint32_t ways) { return CacheGeometry{1, ways, 64}; }

AccessRecord load(std::uint64_t block, std::uint32_t idx = 0) { return {block * 64, idx, true}; }

}  // namespace

TEST_CASE("ABCA on a 4-way set: three cold misses then a hit at position 2") {
  AuxTagDirectory atd(one_set(4));
  CHECK_FALSE(atd.access(load(0)).has_value());
  CHECK_FALSE(atd.access(load(1)).has_value());
  CHECK_FALSE(atd.access(load(2)).has_value());
  const auto hit = atd.access(load(0));
  REQUIRE(hit.has_value());
  CHECK(*hit == 2);

  const RecencyProfile& p = atd.profile();
  CHECK(p.atd_misses == 3);
  CHECK(p.total_accesses == 4);
  CHECK(predict_misses(p, 4) == 3);
  CHECK(predict_misses(p, 3) == 3);
  CHECK(predict_misses(p, 2) == 4);
  CHECK(predict_misses(p, 1) == 4);
}

TEST_CASE("immediate reuse hits at the MRU position") {
  AuxTagDirectory atd(one_set(4));
  atd.access(load(7));
  const auto hit = atd.access(load(7));
  REQUIRE(hit.has_value());
  CHECK(*hit == 0);
  CHECK(predict_misses(atd.profile(), 1) == 1);
}

TEST_CASE("empty profile predicts no misses and the full allocation predicts ATD misses") {
  RecencyProfile empty;
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) CHECK(predict_misses(empty, w) == 0);

  AuxTagDirectory atd(CacheGeometry{16, kMaxWays, 64});
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) atd.access({rng.index(400) * 64, 0, true});
  CHECK(predict_misses(atd.profile(), kMaxWays) == atd.profile().atd_misses);
}

TEST_CASE("predict_misses rejects allocations outside the tracked positions") {
  RecencyProfile p(8);
  CHECK_THROWS_AS(predict_misses(p, 0), std::out_of_range);
  CHECK_THROWS_AS(predict_misses(p, 9), std::out_of_range);
}

TEST_CASE("miss curve element 0 is the access count and later elements match predict_misses") {
  AuxTagDirectory atd(CacheGeometry{8, kMaxWays, 64});
  Rng rng(11);
  for (int i = 0; i < 3000; ++i) atd.access({rng.index(200) * 64, 0, true});
  const auto curve = miss_curve(atd.profile());
  REQUIRE(curve.size() == kMaxWays + 1);
  CHECK(curve[0] == atd.profile().total_accesses);
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) CHECK(curve[w] == predict_misses(atd.profile(), w));
}

TEST_CASE("properties: monotone in ways, conservation of accesses, agreement with direct LRU") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint32_t sets = 1u << rng.index(6);
    const std::uint32_t block = 32u << rng.index(3);
    CacheGeometry g{sets, kMaxWays, block};
    AuxTagDirectory atd(g);
    std::vector<std::uint64_t> addrs;
    const std::uint64_t footprint = 1 + rng.index(sets * 24);
    for (int i = 0; i < 4000; ++i) addrs.push_back(rng.index(footprint) * block + rng.index(block));
    for (std::uint64_t a : addrs) atd.access({a, 0, true});

    const RecencyProfile& p = atd.profile();
    std::uint64_t hits = 0;
    for (std::uint64_t h : p.hits_per_position) hits += h;
    CHECK(hits + p.atd_misses == p.total_accesses);
    for (std::uint32_t w = 1; w < kMaxWays; ++w) CHECK(predict_misses(p, w + 1) <= predict_misses(p, w));
    for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
      CHECK(predict_misses(p, w) == oracles::lru_misses(addrs, sets, w, block));
    }
  }
}

TEST_CASE("set sampling scales predictions by the ratio and skips unsampled sets") {
  CacheGeometry g{64, kMaxWays, 64};
  AuxTagDirectory atd(g, 4);
  CHECK(atd.samples(0));
  CHECK_FALSE(atd.samples(64));  // set 1
  CHECK_FALSE(atd.access({64, 0, true}).has_value());
  CHECK(atd.profile().total_accesses == 0);
  atd.access({0, 0, true});
  CHECK(predict_misses(atd.profile(), 1, 4) == 4);
}

TEST_CASE("reset keeps tags but clears counters") {
  AuxTagDirectory atd(one_set(4));
  atd.access(load(1));
  atd.reset_counters();
  CHECK(atd.profile().total_accesses == 0);
  const auto hit = atd.access(load(1));
  REQUIRE(hit.has_value());
  CHECK(*hit == 0);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(CacheGeometry({3, 16, 64}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(CacheGeometry({4, 16, 48}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(CacheGeometry({4, 0, 64}).validate(), std::invalid_argument);
  CHECK_NOTHROW(CacheGeometry({4, 16, 64}).validate());
  CacheGeometry g{4, 16, 64};
  CHECK(g.set_index(64 * 5) == 1);
  CHECK(g.tag(64 * 5) == 1);
  CHECK(g.block_address(64 * 5 + 17) == 5);
}

TEST_CASE("partitioned cache: a core owning all ways sees ABCA as three misses and a hit") {
  PartitionedCache cache(one_set(4), 1);
  cache.set_way_mask(0, {0, 4});
  CHECK_FALSE(cache.access(0, load(0)));
  CHECK_FALSE(cache.access(0, load(1)));
  CHECK_FALSE(cache.access(0, load(2)));
  CHECK(cache.access(0, load(0)));
  CHECK(cache.misses(0) == 3);
  CHECK(cache.hits(0) == 1);
}

TEST_CASE("partitioned cache: a one-way core misses on ABA") {
  PartitionedCache cache(one_set(4), 2);
  cache.set_way_mask(0, {0, 1});
  cache.set_way_mask(1, {1, 3});
  cache.access(0, load(0));
  cache.access(0, load(1));
  cache.access(0, load(0));
  CHECK(cache.misses(0) == 3);
  CHECK(cache.hits(0) == 0);
}

TEST_CASE("partitioned cache: cores never hit or evict in each other's ways") {
  PartitionedCache cache(one_set(4), 2);
  const WayMask masks[] = {{0, 2}, {2, 2}};
  cache.set_partition(masks);
  cache.access(0, load(1));
  CHECK_FALSE(cache.access(1, load(1)));  // core 1 cannot see core 0's line
  for (std::uint64_t b = 10; b < 20; ++b) cache.access(1, load(b));
  CHECK(cache.access(0, load(1)));  // core 1 thrashing left core 0 intact
}

TEST_CASE("partitioned cache: each core matches a private LRU of its mask size") {
  PartitionedCache cache(CacheGeometry{8, 16, 64}, 2);
  const WayMask masks[] = {{0, 5}, {5, 11}};
  cache.set_partition(masks);
  oracles::LruCache ref0(8, 5, 64), ref1(8, 11, 64);
  Rng rng(5);
  for (int i = 0; i < 20000; ++i) {
    const std::uint32_t core = static_cast<std::uint32_t>(rng.index(2));
    const std::uint64_t a = (rng.index(300) + core * 100000) * 64;
    const bool hit = cache.access(core, {a, 0, true});
    CHECK(hit == (core == 0 ? ref0 : ref1).access(a));
  }
}

TEST_CASE("partitioned cache rejects bad masks") {
  PartitionedCache cache(one_set(4), 2);
  const WayMask overlap[] = {{0, 3}, {2, 2}};
  CHECK_THROWS_AS(cache.set_partition(overlap), std::invalid_argument);
  CHECK_THROWS_AS(cache.set_way_mask(0, {3, 2}), std::invalid_argument);
  CHECK_THROWS_AS(cache.access(1, load(0)), std::invalid_argument);
}

TEST_CASE("trace text round trip and malformed input") {
  std::vector<TraceEntry> entries{{0x1000, 5, true, std::nullopt}, {0xdeadbeef, 2049, false, 5}};
  std::ostringstream out;
  write_trace(out, entries);
  std::istringstream in("# header\n\n" + out.str());
  CHECK(read_trace(in) == entries);
  CHECK(to_access_record(entries[1]).instruction_index == 2049 % kInstructionWindow);

  std::istringstream bad("1000 3 1\nzz 4 1\n");
  CHECK_THROWS_AS(read_trace(bad), std::runtime_error);
  std::istringstream short_line("1000\n");
  CHECK_THROWS_AS(read_trace(short_line), std::runtime_error);
}

TEST_CASE("partition isolation: another core's stream never changes a core's outcomes") {
  const WayMask masks[] = {{0, 6}, {6, 10}};
  std::vector<bool> reference;
  for (std::uint64_t other_seed : {1u, 2u, 3u}) {
    PartitionedCache cache(CacheGeometry{16, 16, 64}, 2);
    cache.set_partition(masks);
    Rng mine(99), other(other_seed);
    std::vector<bool> outcomes;
    for (int i = 0; i < 20000; ++i) {
      outcomes.push_back(cache.access(0, {mine.index(200) * 64, 0, true}));
      // Overlapping address space on purpose.
      for (std::uint64_t k = 0; k < other_seed; ++k) cache.access(1, {other.index(200) * 64, 0, true});
    }
    if (reference.empty()) {
      reference = outcomes;
    } else {
      CHECK(outcomes == reference);
    }
  }
}
