// Leading-miss (LM) counters attached to the ATD. One counter per core size
// and way allocation classifies every predicted miss as leading or
// overlapping, so the memory stall time of any (core, allocation) pair can be
// estimated from the LM count alone.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qosrm/cache_atd.hpp"
#include "qosrm/core_types.hpp"

namespace qosrm {

enum class MissClass { Leading, Overlapping };

/// Last-LM-index and last-OV-distance registers plus the LM count for one
/// ROB size. A miss overlaps the last LM when it lies within the ROB and does
/// not arrive out of order relative to the previous overlapping miss, since
/// out-of-order arrival at the ATD is taken as a data dependency on the LM.
class LeadingMissCounter {
 public:
  explicit LeadingMissCounter(std::uint32_t rob_size,
                              std::uint32_t window = kInstructionWindow);

  MissClass observe(std::uint32_t instruction_index);

  std::uint64_t count() const { return count_; }
  std::uint32_t last_lm_index() const { return last_lm_index_; }
  std::optional<std::uint32_t> last_ov_distance() const { return last_ov_dist_; }
  std::uint32_t rob_size() const { return rob_size_; }
  bool primed() const { return primed_; }

  void reset();

 private:
  std::uint32_t rob_size_;
  std::uint32_t window_;
  std::uint64_t count_ = 0;
  std::uint32_t last_lm_index_ = 0;
  std::optional<std::uint32_t> last_ov_dist_;
  bool primed_ = false;
};

/// |core sizes| x |allocations| counters for one core's ATD.
class LmCounterBank {
 public:
  explicit LmCounterBank(const CoreTable& cores = kDefaultCores,
                         std::uint32_t max_ways = kMaxWays,
                         std::uint32_t window = kInstructionWindow,
                         std::uint32_t sampling_ratio = 1);

  /// Classifies one miss predicted for allocation `ways` on core size `size`.
  /// Throws std::out_of_range for ways outside [1, max_ways].
  MissClass observe_miss(CoreSize size, std::uint32_t ways, std::uint32_t instruction_index);

  /// Feeds one ATD outcome to every counter whose allocation would miss:
  /// all w <= hit position, or every w on an ATD miss. Stores are ignored.
  void observe_access(std::optional<std::uint32_t> hit_position, const AccessRecord& rec);

  /// LM count for (size, ways), scaled by the set-sampling ratio.
  std::uint64_t leading_misses(CoreSize size, std::uint32_t ways) const;
  const LeadingMissCounter& counter(CoreSize size, std::uint32_t ways) const;

  /// Interval boundary.
  void reset();

  std::size_t counter_count() const { return counters_.size(); }
  std::uint32_t max_ways() const { return max_ways_; }
  std::uint32_t window() const { return window_; }

 private:
  std::size_t slot(CoreSize size, std::uint32_t ways) const;

  std::uint32_t max_ways_;
  std::uint32_t window_;
  std::uint32_t sampling_ratio_;
  std::vector<LeadingMissCounter> counters_;
};

/// ATD plus LM counters for one core: the complete per-core monitor.
class CoreMonitor {
 public:
  explicit CoreMonitor(CacheGeometry geometry, const CoreTable& cores = kDefaultCores,
                       std::uint32_t sampling_ratio = 1);

  std::optional<std::uint32_t> access(const AccessRecord& rec);

  std::uint64_t predicted_misses(std::uint32_t ways) const;
  std::uint64_t leading_misses(CoreSize size, std::uint32_t ways) const {
    return lm_.leading_misses(size, ways);
  }

  const AuxTagDirectory& atd() const { return atd_; }
  const LmCounterBank& lm_bank() const { return lm_; }
  void reset_counters();

 private:
  AuxTagDirectory atd_;
  LmCounterBank lm_;
};

/// A load in program order for the exact overlap model. `producer` is the
/// position (in the same sequence) of the load it depends on.
struct ProgramLoad {
  std::uint64_t instruction_index = 0;
  std::optional<std::size_t> producer;
};

/// Exact leading-miss count over a program-ordered trace: a miss leads unless
/// it lies within rob_size instructions after the last leading miss and does
/// not transitively depend on it. Dependency chains may pass through hits.
/// Throws std::invalid_argument for forward dependencies, decreasing
/// instruction indices, or a miss_set of the wrong length.
std::uint64_t oracle_leading_misses(std::span<const ProgramLoad> trace, std::uint32_t rob_size,
                                    const std::vector<bool>& miss_set);

}  // namespace qosrm
