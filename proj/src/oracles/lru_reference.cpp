#include "qosrm/oracles/lru_reference.hpp"

#include <algorithm>
#include <stdexcept>

namespace qosrm::oracles {

LruCache::LruCache(std::uint32_t num_sets, std::uint32_t ways, std::uint32_t block_size_bytes)
    : num_sets_(num_sets), ways_(ways), block_size_(block_size_bytes), sets_(num_sets) {
  if (num_sets == 0 || ways == 0 || block_size_bytes == 0) {
    throw std::invalid_argument("cache dimensions must be positive");
  }
}

bool LruCache::access(std::uint64_t address) {
  const std::uint64_t block = address / block_size_;
  auto& set = sets_[block % num_sets_];
  const auto it = std::find(set.begin(), set.end(), block);
  if (it != set.end()) {
    set.erase(it);
    set.push_back(block);
    ++hits_;
    return true;
  }
  if (set.size() == ways_) set.erase(set.begin());
  set.push_back(block);
  ++misses_;
  return false;
}

std::uint64_t lru_misses(std::span<const std::uint64_t> addresses, std::uint32_t num_sets,
                         std::uint32_t ways, std::uint32_t block_size_bytes) {
  LruCache cache(num_sets, ways, block_size_bytes);
  for (std::uint64_t a : addresses) cache.access(a);
  return cache.misses();
}

}  // namespace qosrm::oracles
