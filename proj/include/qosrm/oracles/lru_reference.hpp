// Reference set-associative LRU cache, written independently of the ATD so it
// can serve as a test oracle for miss prediction.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qosrm::oracles {

class LruCache {
 public:
  LruCache(std::uint32_t num_sets, std::uint32_t ways, std::uint32_t block_size_bytes);

  /// Returns true on a hit.
  bool access(std::uint64_t address);

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  std::uint32_t num_sets_;
  std::uint32_t ways_;
  std::uint32_t block_size_;
  std::vector<std::vector<std::uint64_t>> sets_;  // block numbers, MRU at the back
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

/// Misses of a `ways`-way cache over the address stream.
std::uint64_t lru_misses(std::span<const std::uint64_t> addresses, std::uint32_t num_sets,
                         std::uint32_t ways, std::uint32_t block_size_bytes);

}  // namespace qosrm::oracles
