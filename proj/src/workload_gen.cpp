#include "qosrm/workload_gen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qosrm/mlp_counters.hpp"
#include "qosrm/rng.hpp"

namespace qosrm {

std::size_t category_index(AppCategory c) {
  for (std::size_t i = 0; i < kCategories.size(); ++i) {
    if (kCategories[i] == c) return i;
  }
  return 0;
}

std::string to_string(AppCategory c) {
  return std::string(c.cache == CacheClass::CS ? "CS" : "CI") + "-" +
         (c.parallelism == ParClass::PS ? "PS" : "PI");
}

std::optional<AppCategory> parse_category(std::string_view name) {
  for (AppCategory c : kCategories) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

void PhaseProfile::validate() const {
  if (weight < 0.0 || instructions <= 0.0) {
    throw std::invalid_argument("phase weight and length must be non-negative / positive");
  }
  if (cpi0 < 0.0 || cpi_bp < 0.0 || cpi_cache < 0.0 || cpi0 + cpi_bp + cpi_cache <= 0.0) {
    throw std::invalid_argument("phase CPI components must be non-negative with a positive sum");
  }
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
    if (mpki[w] < 0.0) throw std::invalid_argument("negative MPKI");
    if (w > 1 && mpki[w] > mpki[w - 1] + 1e-12) {
      throw std::invalid_argument("MPKI curve must be non-increasing in ways");
    }
  }
  if (llc_apki < mpki[1]) throw std::invalid_argument("LLC accesses below misses");
  if (extra_mem_pki < 0.0 || dep_prob < 0.0 || dep_prob > 1.0 || p_dyn_base_w < 0.0 ||
      contention_s_per_miss < 0.0) {
    throw std::invalid_argument("phase parameter out of range");
  }
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
    for (std::size_t c = 0; c < kNumCoreSizes; ++c) {
      if (mlp[c][w] < 1.0 || mlp_observed[c][w] < 1.0) {
        throw std::invalid_argument("MLP below 1");
      }
      if (c > 0 && mlp[c][w] < mlp[c - 1][w]) {
        throw std::invalid_argument("MLP must be non-decreasing in core size");
      }
    }
  }
  for (double e : ilp_eff) {
    if (e <= 0.0 || e > 1.0) throw std::invalid_argument("ILP efficiency outside (0, 1]");
  }
}

void AppProfile::validate() const {
  if (phases.empty()) throw std::invalid_argument("app " + name + " has no phases");
  if (sequence.empty()) throw std::invalid_argument("app " + name + " has an empty phase sequence");
  double total = 0.0;
  for (const PhaseProfile& p : phases) {
    p.validate();
    total += p.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("phase weights of app " + name + " do not sum to 1");
  }
  for (std::uint32_t id : sequence) {
    if (id >= phases.size()) throw std::invalid_argument("phase sequence of " + name + " out of range");
  }
}

namespace {

struct CoreTerms {
  double time_s;
  double t_mem;
  double dynamic_j;
};

// Time and core dynamic energy of one interval on core size `c` at (f, w).
CoreTerms core_terms(const PhaseProfile& profile, std::size_t ci, double f, std::uint32_t ways,
                     const SystemParams& sys) {
  const ResourceSetting& base = sys.baseline;
  const double f_b = base.frequency_hz;
  const double n = profile.instructions;

  const double t0_b = profile.cpi0 * n / f_b;
  const double t_bp_b = profile.cpi_bp * n / f_b;
  const double t_cache_b = profile.cpi_cache * n / f_b;
  const double d_b = sys.cores[index_of(base.core)].dispatch_width;
  const double d = sys.cores[ci].dispatch_width;

  const double misses = profile.misses(ways);
  const double excess = std::max(0.0, misses - profile.misses(base.ways));
  const double t_mem =
      misses / profile.mlp[ci][ways] * sys.l_mem_s + excess * profile.contention_s_per_miss;
  const double t_core = (t0_b * d_b / (d * profile.ilp_eff[ci]) + t_bp_b + t_cache_b) * (f_b / f);

  const double v = sys.vf.voltage(f);
  const double v_b = sys.vf.voltage(f_b);
  const double v2 = (v / v_b) * (v / v_b);
  const double busy_power = profile.p_dyn_base_w * sys.epi_ratio[ci] * v2;
  const double dynamic = busy_power * profile.base_busy_time(f_b) +
                         sys.stall_power_factor * busy_power * (f / f_b) * t_mem;
  return {t_core + t_mem, t_mem, dynamic};
}

}  // namespace

GroundTruth ground_truth(const PhaseProfile& profile, const ResourceSetting& setting,
                         const SystemParams& sys) {
  const std::size_t ci = index_of(setting.core);
  const double f_b = sys.baseline.frequency_hz;
  const double f = setting.frequency_hz;
  const double n = profile.instructions;
  const double scale = f_b / f;
  const double t_bp_b = profile.cpi_bp * n / f_b;
  const double t_cache_b = profile.cpi_cache * n / f_b;
  const double misses = profile.misses(setting.ways);
  const CoreTerms terms = core_terms(profile, ci, f, setting.ways, sys);
  const double t_mem = terms.t_mem;
  const double v = sys.vf.voltage(f);

  GroundTruth g;
  g.time_s = terms.time_s;
  g.core_dynamic_j = terms.dynamic_j;
  g.core_static_j = sys.static_coeff_w[ci] * v * v * g.time_s;
  const double mem_accesses = misses + profile.extra_mem_pki * n / 1000.0;
  g.memory_j = mem_accesses * sys.e_mem_j;
  g.energy_j = g.core_dynamic_j + g.core_static_j + g.memory_j;

  IntervalStats& s = g.observed;
  s.t_total = g.time_s;
  s.t_bp = t_bp_b * scale;
  s.t_cache = t_cache_b * scale;
  s.t_mem = t_mem;
  s.f_current = f;
  s.c_current = sys.cores[ci];
  s.w_current = setting.ways;
  s.mem_accesses = mem_accesses;
  s.miss_curve[0] = profile.llc_apki * n / 1000.0;
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
    s.miss_curve[w] = profile.misses(w);
    for (std::size_t c = 0; c < kNumCoreSizes; ++c) {
      s.lm_table[c][w] = profile.misses(w) / profile.mlp_observed[c][w];
    }
  }
  s.avg_mlp = t_mem > 0.0 ? std::max(1.0, misses * sys.l_mem_s / t_mem) : 1.0;
  s.p_dyn_sample = g.core_dynamic_j / g.time_s;
  s.v_sample = v;
  if (sys.per_core_power_sampling) {
    std::array<double, kNumCoreSizes> p{};
    for (std::size_t c = 0; c < kNumCoreSizes; ++c) {
      const CoreTerms t = c == ci ? terms : core_terms(profile, c, f, setting.ways, sys);
      p[c] = t.dynamic_j / t.time_s;
    }
    s.p_dyn_by_core = p;
  }
  s.instructions = n;
  return g;
}

AppCategory categorize(const CategorySamples& s) {
  if (s.mpki_low < 0.0 || s.mpki_base < 0.0 || s.mpki_high < 0.0) {
    throw std::invalid_argument("negative MPKI sample");
  }
  if (s.mlp_s < 1.0 || s.mlp_m < 1.0 || s.mlp_l < 1.0) {
    throw std::invalid_argument("MLP sample below 1");
  }
  AppCategory c;
  if (s.mpki_base >= 0.2) {
    const double var =
        std::max(std::abs(s.mpki_low - s.mpki_base), std::abs(s.mpki_high - s.mpki_base)) /
        s.mpki_base;
    if (var > 0.2) c.cache = CacheClass::CS;
  }
  if (std::abs(s.mlp_l - s.mlp_s) / s.mlp_m > 0.3 && s.mlp_l >= 2.0) {
    c.parallelism = ParClass::PS;
  }
  return c;
}

CategorySamples category_samples(const AppProfile& app, const SystemParams& sys) {
  if (app.phases.empty()) throw std::invalid_argument("app " + app.name + " has no phases");
  const std::uint32_t wb = sys.baseline.ways;
  const std::uint32_t w_low = std::max<std::uint32_t>(1, wb / 2);
  const std::uint32_t w_high = std::min<std::uint32_t>(kMaxWays, wb + wb / 2);

  double instr = 0.0;
  std::array<double, 3> mpki{};
  double misses = 0.0;
  std::array<double, kNumCoreSizes> lm{};
  for (const PhaseProfile& p : app.phases) {
    const double weight = p.weight * p.instructions;
    instr += weight;
    mpki[0] += weight * p.mpki[w_low];
    mpki[1] += weight * p.mpki[wb];
    mpki[2] += weight * p.mpki[w_high];
    misses += weight * p.mpki[wb];
    for (std::size_t c = 0; c < kNumCoreSizes; ++c) lm[c] += weight * p.mpki[wb] / p.mlp[c][wb];
  }
  if (instr <= 0.0) throw std::invalid_argument("app " + app.name + " has zero weighted length");
  CategorySamples s;
  s.mpki_low = mpki[0] / instr;
  s.mpki_base = mpki[1] / instr;
  s.mpki_high = mpki[2] / instr;
  const auto mlp_of = [&](std::size_t c) { return misses > 0.0 ? misses / lm[c] : 1.0; };
  s.mlp_s = mlp_of(0);
  s.mlp_m = mlp_of(1);
  s.mlp_l = mlp_of(2);
  return s;
}

AppCategory categorize(const AppProfile& app, const SystemParams& sys) {
  return categorize(category_samples(app, sys));
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    case Scenario::S4: return "S4";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (Scenario s : kScenarios) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

ScenarioTable default_scenario_table() {
  const AppCategory csps{CacheClass::CS, ParClass::PS};
  const AppCategory cspi{CacheClass::CS, ParClass::PI};
  const AppCategory cips{CacheClass::CI, ParClass::PS};
  const AppCategory cipi{CacheClass::CI, ParClass::PI};
  ScenarioTable t;
  t[0] = {{csps, csps}, {cspi, csps}, {cips, csps}, {cipi, csps}, {cips, cspi}};
  t[1] = {{cspi, cspi}, {cipi, cspi}};
  t[2] = {{cips, cips}, {cipi, cips}};
  t[3] = {{cipi, cipi}};
  return t;
}

Workload build_scenario(const ScenarioSpec& spec, const Library& library,
                        const std::vector<AppCategory>& categories, const ScenarioTable& table) {
  if (spec.num_cores == 0 || spec.num_cores % 2 != 0) {
    throw std::invalid_argument("scenario core count must be even and positive");
  }
  if (categories.size() != library.apps.size()) {
    throw std::invalid_argument("one category per library app required");
  }
  std::array<std::vector<std::size_t>, 4> members;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    members[category_index(categories[i])].push_back(i);
  }
  const auto& cells = table[scenario_index(spec.scenario)];
  std::vector<double> weight;
  double total = 0.0;
  for (const ScenarioCell& cell : cells) {
    const double w = static_cast<double>(members[category_index(cell.first)].size()) *
                     static_cast<double>(members[category_index(cell.second)].size());
    weight.push_back(w);
    total += w;
  }
  if (total <= 0.0) {
    throw std::invalid_argument("library cannot populate any category pair of scenario " +
                                std::string(to_string(spec.scenario)));
  }

  Rng rng(mix_seed(spec.seed, scenario_index(spec.scenario)));
  Workload out;
  out.spec = spec;
  const std::uint32_t half = spec.num_cores / 2;
  out.apps.assign(spec.num_cores, 0);
  for (std::uint32_t i = 0; i < half; ++i) {
    double u = rng.uniform() * total;
    std::size_t k = 0;
    for (; k < cells.size(); ++k) {
      if (u < weight[k]) break;
      u -= weight[k];
    }
    if (k == cells.size()) {
      k = cells.size() - 1;
      while (weight[k] == 0.0) --k;
    }
    const auto& a = members[category_index(cells[k].first)];
    const auto& b = members[category_index(cells[k].second)];
    out.apps[i] = a[rng.index(a.size())];
    out.apps[i + half] = b[rng.index(b.size())];
  }
  return out;
}

namespace {

constexpr std::uint64_t kDependentDelay = 128;

std::uint32_t sample_position(const std::array<double, kMaxWays + 1>& tail, double u) {
  std::uint32_t pos = 0;
  while (pos < kMaxWays && u < tail[pos + 1]) ++pos;
  return pos;
}

}  // namespace

SynthTrace synth_trace(const PhaseProfile& profile, std::size_t loads, std::uint64_t seed,
                       const CacheGeometry& geometry, std::uint32_t far_position) {
  geometry.validate();
  if (loads == 0) throw std::invalid_argument("trace length must be positive");
  if (geometry.max_ways != kMaxWays) throw std::invalid_argument("trace generator needs 16 ways");
  for (std::uint32_t w = 2; w <= kMaxWays; ++w) {
    if (profile.mpki[w] > profile.mpki[w - 1] + 1e-12 || profile.mpki[w] < 0.0) {
      throw std::invalid_argument("MPKI curve must be non-negative and non-increasing");
    }
  }
  if (profile.llc_apki <= 0.0 || profile.mpki[1] > profile.llc_apki) {
    throw std::invalid_argument("MPKI exceeds LLC accesses per kilo-instruction");
  }

  // tail[w] = P(position >= w)
  std::array<double, kMaxWays + 1> tail{};
  tail[0] = 1.0;
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) tail[w] = profile.mpki[w] / profile.llc_apki;

  Rng rng(seed);
  const std::uint32_t sets = geometry.num_sets;
  const std::uint32_t ways = geometry.max_ways;
  const std::uint64_t block = geometry.block_size_bytes;
  std::vector<std::uint64_t> next_tag(sets, 0);
  std::vector<std::uint64_t> stacks(static_cast<std::size_t>(sets) * ways);
  const auto address = [&](std::uint32_t set, std::uint64_t tag) {
    return (tag * sets + set) * block;
  };

  SynthTrace out;
  out.entries.reserve(static_cast<std::size_t>(sets) * ways + loads);
  std::uint64_t idx = 0;
  for (std::uint32_t k = 0; k < ways; ++k) {
    for (std::uint32_t s = 0; s < sets; ++s) {
      const std::uint64_t tag = next_tag[s]++;
      // The last block inserted ends up at MRU; fill from the LRU end.
      stacks[static_cast<std::size_t>(s) * ways + (ways - 1 - k)] = tag;
      out.entries.push_back({address(s, tag), idx++, true, std::nullopt});
    }
  }
  out.warmup = out.entries.size();
  idx += kInstructionWindow;

  struct Pending {
    TraceEntry entry;
    std::uint64_t key;
  };
  std::vector<Pending> body;
  body.reserve(loads);
  const double mean_gap = 1000.0 / profile.llc_apki;
  std::optional<std::size_t> last_far;
  for (std::size_t i = 0; i < loads; ++i) {
    // Bursty spacing: most loads come in short runs separated by long gaps.
    const bool burst = rng.bernoulli(0.7);
    const double mean = burst ? 0.25 * mean_gap : (mean_gap - 0.7 * 0.25 * mean_gap) / 0.3;
    idx += 1 + static_cast<std::uint64_t>(rng.exponential(std::max(0.0, mean - 1.0)));

    const std::uint32_t set = static_cast<std::uint32_t>(rng.index(sets));
    const std::uint32_t pos = sample_position(tail, rng.uniform());
    std::uint64_t* stack = &stacks[static_cast<std::size_t>(set) * ways];
    std::uint64_t tag;
    if (pos < ways) {
      tag = stack[pos];
      std::copy_backward(stack, stack + pos, stack + pos + 1);
    } else {
      tag = next_tag[set]++;
      std::copy_backward(stack, stack + ways - 1, stack + ways);
    }
    stack[0] = tag;

    Pending p{{address(set, tag), idx, true, std::nullopt}, idx};
    if (last_far && rng.bernoulli(profile.dep_prob)) {
      const Pending& producer = body[*last_far];
      p.entry.dep_index = producer.entry.instruction_index;
      p.key = std::max(idx, producer.key + kDependentDelay);
    }
    body.push_back(p);
    if (pos >= far_position) last_far = body.size() - 1;
  }
  std::stable_sort(body.begin(), body.end(), [](const Pending& a, const Pending& b) {
    return a.key != b.key ? a.key < b.key : a.entry.instruction_index < b.entry.instruction_index;
  });
  for (const Pending& p : body) out.entries.push_back(p.entry);
  return out;
}

TraceMeasurement measure_trace(const SynthTrace& trace, const CoreTable& cores,
                               const CacheGeometry& geometry) {
  if (trace.warmup > trace.entries.size()) throw std::invalid_argument("warm-up beyond trace");
  AuxTagDirectory atd(geometry);
  LmCounterBank bank(cores, geometry.max_ways);
  for (std::size_t i = 0; i < trace.warmup; ++i) atd.access(to_access_record(trace.entries[i]));
  atd.reset_counters();

  const std::size_t n = trace.entries.size() - trace.warmup;
  // Recency position at arrival; max_ways + 1 marks an ATD miss.
  std::vector<std::uint32_t> position(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TraceEntry& e = trace.entries[trace.warmup + i];
    const AccessRecord rec = to_access_record(e);
    const auto pos = atd.access(rec);
    bank.observe_access(pos, rec);
    position[i] = pos ? *pos : geometry.max_ways + 1;
  }

  // Program order for the exact count.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return trace.entries[trace.warmup + a].instruction_index <
           trace.entries[trace.warmup + b].instruction_index;
  });
  std::vector<ProgramLoad> program;
  std::vector<std::uint32_t> program_pos;
  program.reserve(n);
  program_pos.reserve(n);
  std::vector<std::pair<std::uint64_t, std::size_t>> index_to_pos;
  index_to_pos.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const TraceEntry& e = trace.entries[trace.warmup + order[k]];
    index_to_pos.emplace_back(e.instruction_index, k);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const TraceEntry& e = trace.entries[trace.warmup + order[k]];
    ProgramLoad load{e.instruction_index, std::nullopt};
    if (e.dep_index) {
      const auto it = std::lower_bound(
          index_to_pos.begin(), index_to_pos.end(), std::make_pair(*e.dep_index, std::size_t{0}));
      if (it != index_to_pos.end() && it->first == *e.dep_index) load.producer = it->second;
    }
    program.push_back(load);
    program_pos.push_back(position[order[k]]);
  }

  TraceMeasurement m;
  std::vector<bool> miss(n);
  for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
    std::uint64_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
      miss[k] = program_pos[k] >= w;
      count += miss[k];
    }
    m.misses[w] = static_cast<double>(count);
    for (CoreSize c : kCoreSizes) {
      const std::size_t ci = index_of(c);
      m.lm_oracle[ci][w] =
          static_cast<double>(oracle_leading_misses(program, cores[ci].rob, miss));
      m.lm_heuristic[ci][w] = static_cast<double>(bank.leading_misses(c, w));
    }
  }
  return m;
}

void realize_mlp(PhaseProfile& profile, const CoreTable& cores, const CacheGeometry& geometry) {
  // Enough loads for a few hundred misses at the largest allocation.
  const double miss_fraction = std::max(profile.mpki[kMaxWays] / profile.llc_apki, 1e-6);
  const std::size_t loads =
      static_cast<std::size_t>(std::clamp(600.0 / miss_fraction, 20000.0, 120000.0));
  const SynthTrace trace = synth_trace(profile, loads, profile.trace_seed, geometry);
  const TraceMeasurement m = measure_trace(trace, cores, geometry);
  for (std::size_t c = 0; c < kNumCoreSizes; ++c) {
    profile.mlp[c][0] = 1.0;
    profile.mlp_observed[c][0] = 1.0;
    for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
      const double miss = m.misses[w];
      const double exact = m.lm_oracle[c][w] > 0.0 ? miss / m.lm_oracle[c][w] : 1.0;
      const double heur = m.lm_heuristic[c][w] > 0.0 ? miss / m.lm_heuristic[c][w] : 1.0;
      profile.mlp[c][w] = std::max(1.0, c > 0 ? std::max(exact, profile.mlp[c - 1][w]) : exact);
      profile.mlp_observed[c][w] = std::max(1.0, heur);
    }
  }
}

namespace {

struct Archetype {
  double m8 = 1.0;
  double sens = 0.0;
  double knee = 8.0;
  double indep = 0.5;
  double cpi0 = 0.3;
  double cpi1 = 0.3;
  double bp_share = 0.5;
  double extra = 0.5;
};

Archetype draw_archetype(AppCategory cat, Rng& rng) {
  Archetype a;
  const bool cs = cat.cache == CacheClass::CS;
  const bool ps = cat.parallelism == ParClass::PS;
  if (cs) {
    a.m8 = ps ? rng.uniform(1.5, 9.0) : rng.uniform(0.8, 8.0);
    a.sens = rng.uniform(0.1, 0.6);
    a.knee = rng.uniform(3.0, 14.0);
  } else {
    if (ps) {
      a.m8 = rng.uniform(8.0, 25.0);
    } else {
      a.m8 = rng.bernoulli(0.5) ? rng.uniform(0.02, 0.18) : rng.uniform(0.3, 3.0);
    }
    a.sens = rng.uniform(0.0, 0.06);
  }
  a.indep = ps ? rng.uniform(0.6, 0.95) : rng.uniform(0.0, 0.1);
  a.cpi0 = rng.uniform(0.25, 0.5);
  a.cpi1 = rng.uniform(0.2, 0.5);
  a.bp_share = rng.uniform(0.3, 0.7);
  a.extra = rng.uniform(0.2, 1.5);
  return a;
}

WayTable mpki_curve(bool cache_sensitive, double m8, double sens, double knee) {
  WayTable t{};
  if (cache_sensitive) {
    // Smooth decay with a knee where the working set starts to fit.
    const auto shape = [&](double w) {
      return std::exp(-(w - 8.0) * sens / 4.0) * (0.5 + 1.0 / (1.0 + std::exp((w - knee) * 1.5)));
    };
    const double at8 = shape(8.0);
    for (std::uint32_t w = 1; w <= kMaxWays; ++w) t[w] = m8 * shape(w) / at8;
  } else {
    const std::array<std::pair<double, double>, 4> knots{{{1.0, m8 * (1 + sens) * 1.05},
                                                          {4.0, m8 * (1 + sens)},
                                                          {8.0, m8},
                                                          {16.0, m8 / (1 + sens)}}};
    for (std::uint32_t w = 1; w <= kMaxWays; ++w) {
      for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const auto [w0, m0] = knots[k];
        const auto [w1, m1] = knots[k + 1];
        if (w >= w0 && w <= w1) {
          t[w] = m0 + (m1 - m0) * (w - w0) / (w1 - w0);
          break;
        }
      }
    }
  }
  for (std::uint32_t w = 2; w <= kMaxWays; ++w) t[w] = std::min(t[w], t[w - 1]);
  return t;
}

std::vector<std::uint32_t> phase_counts(const std::vector<double>& raw, std::uint32_t length) {
  const std::size_t n = raw.size();
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<std::uint32_t> counts(n, 1);
  const std::uint32_t spare = length - static_cast<std::uint32_t>(n);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::uint32_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = raw[i] / total * spare;
    const auto whole = static_cast<std::uint32_t>(std::floor(exact));
    counts[i] += whole;
    assigned += whole;
    remainders.emplace_back(exact - whole, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::uint32_t k = 0; assigned < spare; ++k, ++assigned) ++counts[remainders[k].second];
  return counts;
}

std::vector<std::uint32_t> phase_sequence(const std::vector<std::uint32_t>& counts, Rng& rng) {
  // Runs of 1-8 intervals per phase, shuffled.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> runs;
  for (std::uint32_t id = 0; id < counts.size(); ++id) {
    std::uint32_t left = counts[id];
    while (left > 0) {
      const std::uint32_t len = std::min<std::uint32_t>(left, 1 + static_cast<std::uint32_t>(rng.index(8)));
      runs.emplace_back(id, len);
      left -= len;
    }
  }
  for (std::size_t i = runs.size(); i > 1; --i) std::swap(runs[i - 1], runs[rng.index(i)]);
  std::vector<std::uint32_t> seq;
  for (const auto& [id, len] : runs) seq.insert(seq.end(), len, id);
  return seq;
}

}  // namespace

AppProfile generate_app(AppCategory target, const std::string& name, const LibraryParams& params,
                        std::uint64_t seed, const SystemParams& sys) {
  if (params.min_phases == 0 || params.min_phases > params.max_phases ||
      params.sequence_length < params.max_phases) {
    throw std::invalid_argument("invalid phase parameters");
  }
  Rng rng(seed);
  const bool cs = target.cache == CacheClass::CS;
  for (std::uint32_t attempt = 0; attempt < params.max_attempts; ++attempt) {
    const Archetype base = draw_archetype(target, rng);
    const std::uint32_t phases =
        params.min_phases +
        static_cast<std::uint32_t>(rng.index(params.max_phases - params.min_phases + 1));

    AppProfile app;
    app.name = name;
    app.label = to_string(target);
    std::vector<double> raw;
    for (std::uint32_t i = 0; i < phases; ++i) {
      PhaseProfile p;
      p.instructions = sys.interval_instructions;
      const double m8 = base.m8 * rng.uniform(0.8, 1.2);
      const double sens = base.sens * rng.uniform(0.85, 1.15);
      const double knee = base.knee + rng.uniform(-1.0, 1.0);
      p.mpki = mpki_curve(cs, m8, sens, knee);
      p.mpki[0] = 0.0;
      p.llc_apki = std::max(p.mpki[1] * rng.uniform(1.3, 2.0), rng.uniform(2.0, 6.0));
      p.extra_mem_pki = base.extra * rng.uniform(0.9, 1.1);
      const double indep = std::clamp(base.indep + rng.uniform(-0.03, 0.03), 0.0, 1.0);
      p.dep_prob = 1.0 - indep;
      const double cpi1 = base.cpi1 * rng.uniform(0.9, 1.1);
      p.cpi0 = base.cpi0 * rng.uniform(0.9, 1.1);
      p.cpi_bp = cpi1 * base.bp_share;
      p.cpi_cache = cpi1 * (1.0 - base.bp_share);
      p.trace_seed = rng.next();
      raw.push_back(std::pow(rng.uniform(0.2, 1.0), 2.0));
      app.phases.push_back(p);
    }
    const auto counts = phase_counts(raw, params.sequence_length);
    for (std::uint32_t i = 0; i < phases; ++i) {
      app.phases[i].weight = static_cast<double>(counts[i]) / params.sequence_length;
    }
    app.sequence = phase_sequence(counts, rng);

    // The cache class depends on MPKI alone; screen it before tracing.
    for (auto& p : app.phases) {
      for (auto& row : p.mlp) row.fill(1.0);
    }
    if (categorize(app, sys).cache != target.cache) continue;
    for (auto& p : app.phases) realize_mlp(p, sys.cores, sys.geometry);
    if (categorize(app, sys) != target) continue;
    app.validate();
    return app;
  }
  throw std::runtime_error("could not generate a " + to_string(target) + " app within " +
                           std::to_string(params.max_attempts) + " attempts");
}

Library generate_library(const LibraryParams& params, std::uint64_t seed,
                         const SystemParams& sys) {
  Library lib;
  for (std::size_t k = 0; k < kCategories.size(); ++k) {
    for (std::uint32_t i = 0; i < params.apps_per_category[k]; ++i) {
      std::string cat = to_string(kCategories[k]);
      std::string name = cat + "-" + std::to_string(i);
      std::transform(name.begin(), name.end(), name.begin(),
                     [](unsigned char ch) { return ch == '-' ? '_' : std::tolower(ch); });
      lib.apps.push_back(
          generate_app(kCategories[k], name, params, mix_seed(seed, k * 1000 + i), sys));
    }
  }
  return lib;
}

}  // namespace qosrm
