#include "qosrm/cache_atd.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace qosrm {

void CacheGeometry::validate() const {
  if (num_sets == 0 || !std::has_single_bit(num_sets)) {
    throw std::invalid_argument("num_sets must be a power of two");
  }
  if (block_size_bytes == 0 || !std::has_single_bit(block_size_bytes)) {
    throw std::invalid_argument("block_size_bytes must be a power of two");
  }
  if (max_ways == 0) {
    throw std::invalid_argument("max_ways must be at least 1");
  }
}

std::uint64_t CacheGeometry::block_address(std::uint64_t address) const {
  return address >> std::countr_zero(block_size_bytes);
}

std::uint32_t CacheGeometry::set_index(std::uint64_t address) const {
  return static_cast<std::uint32_t>(block_address(address) & (num_sets - 1));
}

std::uint64_t CacheGeometry::tag(std::uint64_t address) const {
  return block_address(address) >> std::countr_zero(num_sets);
}

void RecencyProfile::reset() {
  std::fill(hits_per_position.begin(), hits_per_position.end(), 0);
  atd_misses = 0;
  total_accesses = 0;
}

std::uint64_t predict_misses(const RecencyProfile& profile, std::uint32_t ways,
                             std::uint32_t sampling_ratio) {
  if (ways < 1 || ways > profile.positions()) {
    throw std::out_of_range("way count " + std::to_string(ways) + " outside [1, " +
                            std::to_string(profile.positions()) + "]");
  }
  std::uint64_t misses = profile.atd_misses;
  for (std::uint32_t p = ways; p < profile.positions(); ++p) {
    misses += profile.hits_per_position[p];
  }
  return misses * sampling_ratio;
}

std::vector<std::uint64_t> miss_curve(const RecencyProfile& profile,
                                      std::uint32_t sampling_ratio) {
  std::vector<std::uint64_t> curve(profile.positions() + 1, 0);
  std::uint64_t running = profile.atd_misses;
  for (std::uint32_t w = profile.positions(); w >= 1; --w) {
    curve[w] = running * sampling_ratio;
    running += profile.hits_per_position[w - 1];
  }
  curve[0] = running * sampling_ratio;
  return curve;
}

AuxTagDirectory::AuxTagDirectory(CacheGeometry geometry, std::uint32_t sampling_ratio)
    : geometry_(geometry), sampling_ratio_(sampling_ratio), profile_(geometry.max_ways) {
  geometry_.validate();
  if (sampling_ratio_ == 0) {
    throw std::invalid_argument("sampling ratio must be at least 1");
  }
  tags_.assign(static_cast<std::size_t>(geometry_.num_sets) * geometry_.max_ways, 0);
  fill_.assign(geometry_.num_sets, 0);
}

bool AuxTagDirectory::samples(std::uint64_t address) const {
  return geometry_.set_index(address) % sampling_ratio_ == 0;
}

std::optional<std::uint32_t> AuxTagDirectory::access(const AccessRecord& rec) {
  if (!samples(rec.address)) return std::nullopt;

  const std::uint32_t set = geometry_.set_index(rec.address);
  const std::uint64_t block = geometry_.block_address(rec.address);
  std::uint64_t* stack = tags_.data() + static_cast<std::size_t>(set) * geometry_.max_ways;
  std::uint32_t& fill = fill_[set];

  ++profile_.total_accesses;
  const auto end = stack + fill;
  const auto it = std::find(stack, end, block);
  if (it != end) {
    const auto pos = static_cast<std::uint32_t>(it - stack);
    ++profile_.hits_per_position[pos];
    std::copy_backward(stack, it, it + 1);
    stack[0] = block;
    return pos;
  }

  ++profile_.atd_misses;
  if (fill < geometry_.max_ways) ++fill;
  std::copy_backward(stack, stack + fill - 1, stack + fill);
  stack[0] = block;
  return std::nullopt;
}

PartitionedCache::PartitionedCache(CacheGeometry geometry, std::uint32_t num_cores)
    : geometry_(geometry),
      masks_(num_cores),
      hits_(num_cores, 0),
      misses_(num_cores, 0) {
  geometry_.validate();
  if (num_cores == 0) throw std::invalid_argument("at least one core required");
  lines_.resize(static_cast<std::size_t>(geometry_.num_sets) * geometry_.max_ways);
}

void PartitionedCache::check_disjoint(std::span<const WayMask> masks, std::uint32_t ways) {
  std::vector<int> owner(ways, -1);
  for (std::size_t c = 0; c < masks.size(); ++c) {
    const WayMask& m = masks[c];
    if (m.count == 0) continue;
    if (m.first + m.count > ways) {
      throw std::invalid_argument("way mask of core " + std::to_string(c) +
                                  " exceeds associativity");
    }
    for (std::uint32_t w = m.first; w < m.first + m.count; ++w) {
      if (owner[w] >= 0) {
        throw std::invalid_argument("way " + std::to_string(w) + " assigned to cores " +
                                    std::to_string(owner[w]) + " and " + std::to_string(c));
      }
      owner[w] = static_cast<int>(c);
    }
  }
}

void PartitionedCache::set_partition(std::span<const WayMask> masks) {
  if (masks.size() != masks_.size()) {
    throw std::invalid_argument("partition must give one mask per core");
  }
  for (std::size_t c = 0; c < masks.size(); ++c) {
    if (masks[c].count == 0) {
      throw std::invalid_argument("empty way mask for core " + std::to_string(c));
    }
  }
  check_disjoint(masks, geometry_.max_ways);
  masks_.assign(masks.begin(), masks.end());
}

void PartitionedCache::set_way_mask(std::uint32_t core, WayMask mask) {
  if (mask.count == 0) {
    throw std::invalid_argument("empty way mask for core " + std::to_string(core));
  }
  std::vector<WayMask> next = masks_;
  next.at(core) = mask;
  check_disjoint(next, geometry_.max_ways);
  masks_ = std::move(next);
}

bool PartitionedCache::access(std::uint32_t core, const AccessRecord& rec) {
  const WayMask& mask = masks_.at(core);
  if (mask.count == 0) {
    throw std::invalid_argument("core " + std::to_string(core) + " has no LLC ways");
  }
  const std::uint32_t set = geometry_.set_index(rec.address);
  const std::uint64_t tag = geometry_.tag(rec.address);
  Line* row = lines_.data() + static_cast<std::size_t>(set) * geometry_.max_ways;
  const auto owner = static_cast<std::int32_t>(core);
  ++clock_;

  Line* victim = nullptr;
  for (std::uint32_t w = mask.first; w < mask.first + mask.count; ++w) {
    Line& line = row[w];
    if (line.owner == owner && line.tag == tag) {
      line.stamp = clock_;
      ++hits_[core];
      return true;
    }
    // Lines of other owners (left over from repartitioning) and invalid lines
    // are replaced first, then the LRU line of this core.
    const bool foreign = line.owner != owner;
    if (victim == nullptr) {
      victim = &line;
    } else {
      const bool victim_foreign = victim->owner != owner;
      if (foreign && !victim_foreign) {
        victim = &line;
      } else if (foreign == victim_foreign && line.stamp < victim->stamp) {
        victim = &line;
      }
    }
  }
  victim->owner = owner;
  victim->tag = tag;
  victim->stamp = clock_;
  ++misses_[core];
  return false;
}

}  // namespace qosrm
