#include "qosrm/oracles/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "qosrm/oracles/exhaustive_allocation.hpp"
#include "qosrm/oracles/lru_reference.hpp"
#include "qosrm/rm_optimizer.hpp"

namespace qosrm::oracles {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint32_t random_rob(Rng& rng) { return kDefaultCores[rng.index(kNumCoreSizes)].rob; }

// Program loads given as (index, producer index) in any order, plus the
// arrival order as indices.
LmTrace assemble(std::vector<std::pair<std::uint64_t, std::optional<std::uint64_t>>> loads,
                 const std::vector<std::uint64_t>& arrival_indices, std::uint32_t rob) {
  std::sort(loads.begin(), loads.end());
  std::vector<std::uint64_t> order(loads.size());
  for (std::size_t i = 0; i < loads.size(); ++i) order[i] = loads[i].first;
  const auto position = [&](std::uint64_t idx) {
    return static_cast<std::size_t>(std::lower_bound(order.begin(), order.end(), idx) - order.begin());
  };
  LmTrace t;
  t.rob = rob;
  for (const auto& [idx, producer] : loads) {
    ProgramLoad p;
    p.instruction_index = idx;
    if (producer) p.producer = position(*producer);
    t.program.push_back(p);
  }
  for (std::uint64_t idx : arrival_indices) t.arrival.push_back(position(idx));
  return t;
}

}  // namespace

SuiteResult validate_atd(const AtdSuiteParams& params, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult r;
  r.name = "atd_vs_lru";
  Rng rng(seed);
  std::uint64_t total_accesses = 0;
  for (std::uint32_t t = 0; t < params.traces; ++t) {
    CacheGeometry g;
    g.num_sets = 1u << rng.index(9);
    g.max_ways = kMaxWays;
    g.block_size_bytes = 32u << rng.index(3);
    const double lo = std::log(static_cast<double>(params.min_accesses));
    const double hi = std::log(static_cast<double>(params.max_accesses));
    const auto n = static_cast<std::size_t>(std::exp(rng.uniform(lo, hi)));
    const std::uint64_t footprint =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(g.num_sets * rng.uniform(1.0, 32.0)));
    const double reuse = rng.uniform(0.3, 0.9);

    std::vector<std::uint64_t> addresses;
    addresses.reserve(n);
    std::vector<std::uint64_t> history;
    std::uint64_t stream = rng.index(footprint);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t block;
      const double u = rng.uniform();
      if (!history.empty() && u < reuse) {
        const auto depth = std::min<std::uint64_t>(history.size(), 1 + static_cast<std::uint64_t>(rng.exponential(
                                                                            static_cast<double>(g.num_sets) * 6.0)));
        block = history[history.size() - depth];
      } else if (u < reuse + 0.1) {
        block = stream++ % footprint;
      } else {
        block = rng.index(footprint);
      }
      history.push_back(block);
      addresses.push_back(block * g.block_size_bytes + rng.index(g.block_size_bytes));
    }

    AuxTagDirectory atd(g);
    for (std::size_t i = 0; i < n; ++i) {
      atd.access({addresses[i], static_cast<std::uint32_t>(i % kInstructionWindow), rng.bernoulli(0.8)});
    }
    for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
      ++r.cases;
      const std::uint64_t expected = lru_misses(addresses, g.num_sets, w, g.block_size_bytes);
      const std::uint64_t got = params.predictor(atd.profile(), w);
      if (got != expected) {
        if (r.mismatches == 0) {
          std::ostringstream os;
          os << "first mismatch: trace " << t << " sets " << g.num_sets << " w " << w << " predicted " << got
             << " direct " << expected;
          r.detail = os.str();
        }
        ++r.mismatches;
      }
    }
    total_accesses += n;
  }
  if (r.detail.empty()) r.detail = std::to_string(params.traces) + " traces, " + std::to_string(total_accesses) + " accesses";
  r.seconds = elapsed(start);
  return r;
}

LmTrace arrival_respecting_trace(std::uint32_t rob, std::size_t episodes, Rng& rng) {
  std::vector<std::pair<std::uint64_t, std::optional<std::uint64_t>>> loads;
  std::vector<std::uint64_t> arrival;
  std::set<std::uint64_t> used;
  const auto add = [&](std::uint64_t idx, std::optional<std::uint64_t> producer) {
    loads.emplace_back(idx, producer);
    arrival.push_back(idx);
    used.insert(idx);
  };

  std::uint64_t anchor = rng.index(64);
  add(anchor, std::nullopt);
  for (std::size_t e = 0; e < episodes; ++e) {
    // Independent misses within the ROB of the anchor, arriving in order.
    const std::size_t k = rng.index(6);
    std::vector<std::uint64_t> offsets;
    for (int tries = 0; offsets.size() < k && tries < 64; ++tries) {
      const std::uint64_t off = 1 + rng.index(rob - 1);
      if (!used.contains(anchor + off) &&
          std::find(offsets.begin(), offsets.end(), off) == offsets.end()) {
        offsets.push_back(off);
      }
    }
    std::sort(offsets.begin(), offsets.end());
    for (std::uint64_t off : offsets) add(anchor + off, std::nullopt);

    // A dependent miss that precedes the last independent in program order
    // arrives out of order and becomes the next anchor.
    if (!offsets.empty() && offsets.back() >= 2 && rng.bernoulli(0.5)) {
      std::optional<std::uint64_t> dep;
      for (int tries = 0; !dep && tries < 64; ++tries) {
        const std::uint64_t off = 1 + rng.index(offsets.back() - 1);
        if (!used.contains(anchor + off)) dep = anchor + off;
      }
      if (dep) {
        add(*dep, anchor);
        anchor = *dep;
        continue;
      }
    }
    anchor += rob + rng.index(kInstructionWindow - rob);
    add(anchor, std::nullopt);
  }
  return assemble(std::move(loads), arrival, rob);
}

LmTrace adversarial_trace(std::uint32_t rob, std::size_t loads_n, Rng& rng) {
  std::vector<std::pair<std::uint64_t, std::optional<std::uint64_t>>> loads;
  std::vector<double> key;
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < loads_n; ++i) {
    idx += 1 + rng.index(rob / 2);
    std::optional<std::uint64_t> producer;
    double k = static_cast<double>(idx) + rng.uniform(0.0, rob / 4.0);
    if (i > 0 && rng.bernoulli(0.35)) {
      const std::size_t back = 1 + rng.index(std::min<std::size_t>(8, i));
      producer = loads[i - back].first;
      k = std::max(k, key[i - back] + rng.uniform(8.0, static_cast<double>(rob)));
    }
    loads.emplace_back(idx, producer);
    key.push_back(k);
  }
  std::vector<std::size_t> order(loads_n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  std::vector<std::uint64_t> arrival;
  for (std::size_t i : order) arrival.push_back(loads[i].first);
  return assemble(std::move(loads), arrival, rob);
}

std::uint64_t heuristic_count(const LmTrace& t, std::uint32_t window) {
  LeadingMissCounter c(t.rob, window);
  for (std::size_t pos : t.arrival) {
    c.observe(static_cast<std::uint32_t>(t.program[pos].instruction_index % window));
  }
  return c.count();
}

std::uint64_t oracle_count(const LmTrace& t) {
  return oracle_leading_misses(t.program, t.rob, std::vector<bool>(t.program.size(), true));
}

SuiteResult validate_lm_arrival(std::uint32_t traces, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult r;
  r.name = "lm_heuristic_vs_oracle";
  Rng rng(seed);
  std::uint64_t misses = 0;
  for (std::uint32_t i = 0; i < traces; ++i) {
    const LmTrace t = arrival_respecting_trace(random_rob(rng), 50 + rng.index(450), rng);
    ++r.cases;
    misses += t.program.size();
    const std::uint64_t h = heuristic_count(t);
    const std::uint64_t o = oracle_count(t);
    if (h != o) {
      if (r.mismatches == 0) {
        r.detail = "first mismatch: trace " + std::to_string(i) + " heuristic " + std::to_string(h) + " oracle " +
                   std::to_string(o);
      }
      ++r.mismatches;
    }
  }
  if (r.detail.empty()) r.detail = std::to_string(traces) + " traces, " + std::to_string(misses) + " misses";
  r.seconds = elapsed(start);
  return r;
}

SuiteResult validate_lm_adversarial(std::uint32_t traces, std::uint64_t seed, double* mean_abs_rel_error) {
  const auto start = Clock::now();
  SuiteResult r;
  r.name = "lm_heuristic_adversarial";
  r.informational = true;
  Rng rng(seed);
  double sum = 0.0;
  for (std::uint32_t i = 0; i < traces; ++i) {
    const LmTrace t = adversarial_trace(random_rob(rng), 200 + rng.index(1800), rng);
    ++r.cases;
    const auto h = static_cast<double>(heuristic_count(t));
    const auto o = static_cast<double>(oracle_count(t));
    if (h != o) ++r.mismatches;
    sum += std::abs(h - o) / o;
  }
  const double mean = traces > 0 ? sum / traces : 0.0;
  if (mean_abs_rel_error) *mean_abs_rel_error = mean;
  std::ostringstream os;
  os << "mean abs relative error " << mean << " (" << r.mismatches << " of " << traces << " traces differ)";
  r.detail = os.str();
  r.seconds = elapsed(start);
  return r;
}

SuiteResult validate_optimizer(const OptimizerSuiteParams& params, std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult r;
  r.name = "optimizer_vs_exhaustive";
  Rng rng(seed);
  const ResourceSetting baseline{CoreSize::M, 2.0e9, 8};
  const WayRange range{};
  std::uint64_t infeasible = 0;
  for (std::uint32_t i = 0; i < params.instances; ++i) {
    const auto n = static_cast<std::uint32_t>(params.min_cores + rng.index(params.max_cores - params.min_cores + 1));
    const std::uint32_t lo = range.min * n;
    const std::uint32_t hi = std::min(params.max_total_ways, range.max * n);
    const auto total = static_cast<std::uint32_t>(lo + rng.index(hi - lo + 1));
    // Small integer energies in some instances force ties.
    const bool coarse = rng.bernoulli(0.2);
    std::vector<EnergyCurve> curves(n);
    for (EnergyCurve& c : curves) {
      c.min_ways = range.min;
      for (std::uint32_t w = range.min; w <= range.max; ++w) {
        if (rng.bernoulli(params.infeasible_fraction)) {
          c.entries.emplace_back(std::nullopt);
          continue;
        }
        // Multiples of 1/1024 add exactly in any order.
        const double e = coarse ? static_cast<double>(rng.index(8)) : static_cast<double>(rng.index(1u << 16)) / 1024.0;
        c.entries.push_back(LocalChoice{e, kCoreSizes[rng.index(kNumCoreSizes)], 1.0e9 + 0.25e9 * rng.index(10)});
      }
    }

    const ExhaustiveResult best = exhaustive_allocation(curves, total);
    const Allocation alloc = global_optimize(curves, total, baseline);
    ++r.cases;
    std::string why;
    const std::uint32_t sum = std::accumulate(alloc.ways.begin(), alloc.ways.end(), 0u);
    if (alloc.ways.size() != n || alloc.settings.size() != n || sum != total) {
      why = "allocation does not cover the cache";
    } else if (!best.feasible) {
      ++infeasible;
      if (!alloc.fallback) why = "feasible allocation reported where none exists";
    } else if (alloc.fallback) {
      why = "fallback although a feasible allocation exists";
    } else if (alloc.total_energy != best.total_energy) {
      std::ostringstream os;
      os << "energy " << alloc.total_energy << " vs exhaustive " << best.total_energy;
      why = os.str();
    } else {
      double e = 0.0;
      for (std::uint32_t k = 0; k < n && why.empty(); ++k) {
        const auto& choice = curves[k].at(alloc.ways[k]);
        if (!choice) {
          why = "chosen entry infeasible";
        } else if (alloc.settings[k].core != choice->core || alloc.settings[k].frequency_hz != choice->frequency_hz) {
          why = "setting differs from the curve choice";
        } else {
          e += choice->energy;
        }
      }
      if (why.empty() && e != alloc.total_energy) why = "reported energy differs from the chosen entries";
    }
    if (!why.empty()) {
      if (r.mismatches == 0) r.detail = "first mismatch: instance " + std::to_string(i) + ": " + why;
      ++r.mismatches;
    }
  }
  if (r.detail.empty()) {
    r.detail = std::to_string(params.instances) + " instances, " + std::to_string(infeasible) + " without a feasible split";
  }
  r.seconds = elapsed(start);
  return r;
}

std::vector<SuiteResult> validate_all(std::uint64_t seed) {
  return {validate_atd({}, mix_seed(seed, 1)), validate_lm_arrival(100, mix_seed(seed, 2)),
          validate_lm_adversarial(100, mix_seed(seed, 3)), validate_optimizer({}, mix_seed(seed, 4))};
}

}  // namespace qosrm::oracles
