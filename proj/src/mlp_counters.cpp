#include "qosrm/mlp_counters.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qosrm {

LeadingMissCounter::LeadingMissCounter(std::uint32_t rob_size, std::uint32_t window)
    : rob_size_(rob_size), window_(window) {
  if (rob_size_ == 0 || window_ == 0) {
    throw std::invalid_argument("ROB size and instruction window must be positive");
  }
  if (rob_size_ >= window_) {
    throw std::invalid_argument("instruction window must exceed the ROB size");
  }
}

MissClass LeadingMissCounter::observe(std::uint32_t instruction_index) {
  instruction_index %= window_;
  if (primed_) {
    const std::uint32_t d = (instruction_index + window_ - last_lm_index_) % window_;
    const bool out_of_order = last_ov_dist_.has_value() && d < *last_ov_dist_;
    if (d < rob_size_ && !out_of_order) {
      last_ov_dist_ = d;
      return MissClass::Overlapping;
    }
  }
  primed_ = true;
  ++count_;
  last_lm_index_ = instruction_index;
  last_ov_dist_.reset();
  return MissClass::Leading;
}

void LeadingMissCounter::reset() {
  count_ = 0;
  last_lm_index_ = 0;
  last_ov_dist_.reset();
  primed_ = false;
}

LmCounterBank::LmCounterBank(const CoreTable& cores, std::uint32_t max_ways,
                             std::uint32_t window, std::uint32_t sampling_ratio)
    : max_ways_(max_ways), window_(window), sampling_ratio_(sampling_ratio) {
  if (max_ways_ == 0) throw std::invalid_argument("max_ways must be positive");
  if (sampling_ratio_ == 0) throw std::invalid_argument("sampling ratio must be at least 1");
  counters_.reserve(kNumCoreSizes * max_ways_);
  for (const CoreConfig& core : cores) {
    for (std::uint32_t w = 1; w <= max_ways_; ++w) {
      counters_.emplace_back(core.rob, window_);
    }
  }
}

std::size_t LmCounterBank::slot(CoreSize size, std::uint32_t ways) const {
  if (ways < 1 || ways > max_ways_) {
    throw std::out_of_range("way count " + std::to_string(ways) + " outside [1, " +
                            std::to_string(max_ways_) + "]");
  }
  return index_of(size) * max_ways_ + (ways - 1);
}

MissClass LmCounterBank::observe_miss(CoreSize size, std::uint32_t ways,
                                      std::uint32_t instruction_index) {
  return counters_[slot(size, ways)].observe(instruction_index);
}

void LmCounterBank::observe_access(std::optional<std::uint32_t> hit_position,
                                   const AccessRecord& rec) {
  if (!rec.is_load) return;
  const std::uint32_t last_missing =
      hit_position ? std::min(*hit_position, max_ways_) : max_ways_;
  for (CoreSize size : kCoreSizes) {
    for (std::uint32_t w = 1; w <= last_missing; ++w) {
      counters_[slot(size, w)].observe(rec.instruction_index);
    }
  }
}

std::uint64_t LmCounterBank::leading_misses(CoreSize size, std::uint32_t ways) const {
  return counters_[slot(size, ways)].count() * sampling_ratio_;
}

const LeadingMissCounter& LmCounterBank::counter(CoreSize size, std::uint32_t ways) const {
  return counters_[slot(size, ways)];
}

void LmCounterBank::reset() {
  for (auto& c : counters_) c.reset();
}

CoreMonitor::CoreMonitor(CacheGeometry geometry, const CoreTable& cores,
                         std::uint32_t sampling_ratio)
    : atd_(geometry, sampling_ratio),
      lm_(cores, geometry.max_ways, kInstructionWindow, sampling_ratio) {}

std::optional<std::uint32_t> CoreMonitor::access(const AccessRecord& rec) {
  if (!atd_.samples(rec.address)) return std::nullopt;
  const auto pos = atd_.access(rec);
  lm_.observe_access(pos, rec);
  return pos;
}

std::uint64_t CoreMonitor::predicted_misses(std::uint32_t ways) const {
  return predict_misses(atd_.profile(), ways, atd_.sampling_ratio());
}

void CoreMonitor::reset_counters() {
  atd_.reset_counters();
  lm_.reset();
}

std::uint64_t oracle_leading_misses(std::span<const ProgramLoad> trace, std::uint32_t rob_size,
                                    const std::vector<bool>& miss_set) {
  if (miss_set.size() != trace.size()) {
    throw std::invalid_argument("miss_set length differs from trace length");
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].producer && *trace[i].producer >= i) {
      throw std::invalid_argument("load " + std::to_string(i) + " depends on a later load");
    }
    if (i > 0 && trace[i].instruction_index < trace[i - 1].instruction_index) {
      throw std::invalid_argument("trace is not in program order at position " +
                                  std::to_string(i));
    }
  }

  std::uint64_t leading = 0;
  std::optional<std::size_t> last_lm;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!miss_set[i]) continue;
    bool is_leading = !last_lm.has_value();
    if (!is_leading) {
      const std::size_t lm = *last_lm;
      const std::uint64_t distance = trace[i].instruction_index - trace[lm].instruction_index;
      if (distance >= rob_size) {
        is_leading = true;
      } else {
        std::optional<std::size_t> p = trace[i].producer;
        while (p && *p > lm) p = trace[*p].producer;
        is_leading = p && *p == lm;
      }
    }
    if (is_leading) {
      ++leading;
      last_lm = i;
    }
  }
  return leading;
}

}  // namespace qosrm
