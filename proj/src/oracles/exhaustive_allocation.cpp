#include "qosrm/oracles/exhaustive_allocation.hpp"

namespace qosrm::oracles {

namespace {

struct Search {
  std::span<const EnergyCurve> curves;
  std::vector<std::uint32_t> current;
  ExhaustiveResult best;

  void visit(std::size_t core, std::uint32_t left, double energy) {
    if (core == curves.size()) {
      if (left != 0) return;
      ++best.evaluated;
      if (!best.feasible || energy < best.total_energy) {
        best.feasible = true;
        best.total_energy = energy;
        best.ways = current;
      }
      return;
    }
    const EnergyCurve& c = curves[core];
    for (std::uint32_t w = c.min_ways; w <= c.max_ways() && w <= left; ++w) {
      const auto& e = c.at(w);
      if (!e) continue;
      current[core] = w;
      visit(core + 1, left - w, energy + e->energy);
    }
  }
};

}  // namespace

ExhaustiveResult exhaustive_allocation(std::span<const EnergyCurve> curves, std::uint32_t total_ways) {
  Search s{curves, std::vector<std::uint32_t>(curves.size(), 0), {}};
  s.visit(0, total_ways, 0.0);
  return s.best;
}

}  // namespace qosrm::oracles
