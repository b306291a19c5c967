#include "qosrm/system.hpp"

#include <stdexcept>

namespace qosrm {

void SystemParams::validate() const {
  validate_core_table(cores);
  geometry.validate();
  if (way_range.min < 1 || way_range.max > geometry.max_ways || way_range.min > way_range.max) {
    throw std::invalid_argument("way range must lie within [1, max_ways]");
  }
  if (ways_per_core < way_range.min || ways_per_core > way_range.max) {
    throw std::invalid_argument("ways_per_core outside the way range");
  }
  if (baseline.ways < way_range.min || baseline.ways > way_range.max) {
    throw std::invalid_argument("baseline way count outside the way range");
  }
  vf.index_of(baseline.frequency_hz);
  if (alpha < 1.0) throw std::invalid_argument("alpha must be at least 1");
  for (double k : static_coeff_w) {
    if (k < 0.0) throw std::invalid_argument("static power coefficients must be non-negative");
  }
  for (double e : epi_ratio) {
    if (e <= 0.0) throw std::invalid_argument("energy-per-instruction ratios must be positive");
  }
  if (stall_power_factor < 0.0 || l_mem_s <= 0.0 || e_mem_j < 0.0 || uncore_power_w < 0.0) {
    throw std::invalid_argument("memory and power constants must be non-negative");
  }
  if (interval_instructions <= 0.0 || target_intervals == 0) {
    throw std::invalid_argument("run length must be positive");
  }
}

ModelContext model_context(const SystemParams& sys) {
  ModelContext ctx;
  ctx.cores = sys.cores;
  ctx.power = sys.power_tables();
  ctx.l_mem_s = sys.l_mem_s;
  ctx.e_mem_j = sys.e_mem_j;
  ctx.alpha = sys.alpha;
  ctx.range = sys.way_range;
  ctx.dyn_scaling = sys.dyn_power_scaling;
  return ctx;
}

}  // namespace qosrm
