// Set-associative LRU structures for the shared LLC: the per-core auxiliary
// tag directory (ATD) that yields miss counts for every way allocation, and
// the way-partitioned main cache used for trace replay.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qosrm {

/// Number of instruction-index values carried with every ATD access (10 bits).
inline constexpr std::uint32_t kInstructionWindow = 1024;

/// Per-core allocation ceiling; the ATD tracks this many recency positions.
inline constexpr std::uint32_t kMaxWays = 16;

struct CacheGeometry {
  std::uint32_t num_sets = 2048;
  std::uint32_t max_ways = kMaxWays;
  std::uint32_t block_size_bytes = 64;

  /// Throws std::invalid_argument unless sets and block size are powers of two
  /// and max_ways >= 1.
  void validate() const;

  std::uint64_t block_address(std::uint64_t address) const;
  std::uint32_t set_index(std::uint64_t address) const;
  std::uint64_t tag(std::uint64_t address) const;
};

struct AccessRecord {
  std::uint64_t address = 0;
  std::uint32_t instruction_index = 0;  // < kInstructionWindow
  bool is_load = true;
};

/// Hit counters by LRU stack position (0 = MRU) plus the ATD misses.
struct RecencyProfile {
  std::vector<std::uint64_t> hits_per_position;
  std::uint64_t atd_misses = 0;
  std::uint64_t total_accesses = 0;

  explicit RecencyProfile(std::uint32_t positions = kMaxWays)
      : hits_per_position(positions, 0) {}

  std::uint32_t positions() const {
    return static_cast<std::uint32_t>(hits_per_position.size());
  }
  void reset();
};

/// Predicted misses for an allocation of `ways` ways: ATD misses plus hits at
/// positions >= ways, scaled by the set-sampling ratio.
/// Throws std::out_of_range unless 1 <= ways <= profile.positions().
std::uint64_t predict_misses(const RecencyProfile& profile, std::uint32_t ways,
                             std::uint32_t sampling_ratio = 1);

/// Miss curve for w = 1..positions; element 0 is unused and set to the
/// total access count (a zero-way cache misses everything).
std::vector<std::uint64_t> miss_curve(const RecencyProfile& profile,
                                      std::uint32_t sampling_ratio = 1);

/// Unpartitioned LRU shadow directory for one core. Only sets with
/// `set % sampling_ratio == 0` are modelled.
class AuxTagDirectory {
 public:
  explicit AuxTagDirectory(CacheGeometry geometry, std::uint32_t sampling_ratio = 1);

  bool samples(std::uint64_t address) const;

  /// Looks up and updates the set's LRU stack. Returns the recency position
  /// before promotion on a hit, nullopt on a miss. Accesses to unsampled sets
  /// are ignored and return nullopt without touching the counters.
  std::optional<std::uint32_t> access(const AccessRecord& rec);

  const RecencyProfile& profile() const { return profile_; }
  /// Clears counters; tag state is kept (interval boundary).
  void reset_counters() { profile_.reset(); }

  const CacheGeometry& geometry() const { return geometry_; }
  std::uint32_t sampling_ratio() const { return sampling_ratio_; }

 private:
  CacheGeometry geometry_;
  std::uint32_t sampling_ratio_;
  std::vector<std::uint64_t> tags_;    // [set][position], MRU first
  std::vector<std::uint32_t> fill_;    // valid entries per set
  RecencyProfile profile_;
};

/// Contiguous way range owned by one core.
struct WayMask {
  std::uint32_t first = 0;
  std::uint32_t count = 0;
};

/// Shared cache with per-core contiguous, disjoint way masks. Lookups and
/// replacement are confined to the requesting core's mask; repartitioning
/// does not flush, stale lines are overwritten on replacement.
class PartitionedCache {
 public:
  PartitionedCache(CacheGeometry geometry, std::uint32_t num_cores);

  /// Installs a full partition. Throws std::invalid_argument on an empty
  /// mask, a mask beyond the associativity, or overlapping masks.
  void set_partition(std::span<const WayMask> masks);
  void set_way_mask(std::uint32_t core, WayMask mask);
  const WayMask& way_mask(std::uint32_t core) const { return masks_.at(core); }

  /// Throws std::invalid_argument if the core has no ways.
  bool access(std::uint32_t core, const AccessRecord& rec);

  std::uint64_t hits(std::uint32_t core) const { return hits_.at(core); }
  std::uint64_t misses(std::uint32_t core) const { return misses_.at(core); }
  std::uint32_t num_cores() const { return static_cast<std::uint32_t>(masks_.size()); }

 private:
  struct Line {
    std::uint64_t tag = 0;
    std::uint64_t stamp = 0;
    std::int32_t owner = -1;
  };

  static void check_disjoint(std::span<const WayMask> masks, std::uint32_t ways);

  CacheGeometry geometry_;
  std::vector<WayMask> masks_;
  std::vector<Line> lines_;  // [set][way]
  std::vector<std::uint64_t> hits_;
  std::vector<std::uint64_t> misses_;
  std::uint64_t clock_ = 0;
};

}  // namespace qosrm
