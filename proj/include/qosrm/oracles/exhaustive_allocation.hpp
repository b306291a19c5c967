// Brute-force way allocation: enumerates every split of the cache over the
// cores' energy curves. Exponential in the core count; for checking the
// curve-combination optimizer on small instances.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qosrm/rm_optimizer.hpp"

namespace qosrm::oracles {

struct ExhaustiveResult {
  bool feasible = false;
  double total_energy = 0.0;
  std::vector<std::uint32_t> ways;  // first minimum in lexicographic order
  std::uint64_t evaluated = 0;      // complete splits visited
};

ExhaustiveResult exhaustive_allocation(std::span<const EnergyCurve> curves, std::uint32_t total_ways);

}  // namespace qosrm::oracles
