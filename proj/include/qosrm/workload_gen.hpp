// Synthetic applications standing in for a detailed-simulation database.
//
// A PhaseProfile describes one program phase at every (core, frequency,
// allocation) setting: dispatch-bound and branch/cache CPI at the baseline,
// an MPKI curve over way counts and an effective MLP table over (core, ways).
// The MLP tables are realized from a synthetic dependency-annotated trace:
// `mlp` uses the exact leading-miss count, `mlp_observed` the hardware
// heuristic, so the counters the resource manager sees carry the heuristic's
// error while the ground truth does not.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qosrm/system.hpp"
#include "qosrm/trace_io.hpp"

namespace qosrm {

enum class CacheClass { CS, CI };
enum class ParClass { PS, PI };

struct AppCategory {
  CacheClass cache = CacheClass::CI;
  ParClass parallelism = ParClass::PI;

  friend bool operator==(const AppCategory&, const AppCategory&) = default;
};

inline constexpr std::array<AppCategory, 4> kCategories{{
    {CacheClass::CS, ParClass::PS},
    {CacheClass::CS, ParClass::PI},
    {CacheClass::CI, ParClass::PS},
    {CacheClass::CI, ParClass::PI},
}};

std::size_t category_index(AppCategory c);
std::string to_string(AppCategory c);  // "CS-PS" etc.
std::optional<AppCategory> parse_category(std::string_view name);

using WayTable = std::array<double, kMaxWays + 1>;           // index 0 unused
using CoreWayTable = std::array<WayTable, kNumCoreSizes>;    // [core][ways]

struct PhaseProfile {
  double weight = 1.0;               // fraction of the app's intervals
  double instructions = 100e6;       // interval length
  double cpi0 = 0.3;                 // dispatch-bound cycles per instruction at baseline
  double cpi_bp = 0.1;               // branch misprediction
  double cpi_cache = 0.1;            // on-chip cache hierarchy
  WayTable mpki{};                   // LLC misses per kilo-instruction
  double llc_apki = 20.0;            // LLC accesses per kilo-instruction
  double extra_mem_pki = 0.5;        // memory accesses beyond demand misses
  double dep_prob = 0.0;             // probability that a load chases a far load
  CoreWayTable mlp{};                // ground-truth effective MLP
  CoreWayTable mlp_observed{};       // misses per heuristic leading miss
  std::array<double, kNumCoreSizes> ilp_eff{1.0, 1.0, 0.95};
  double p_dyn_base_w = 2.0;         // busy dynamic power at the baseline setting
  double contention_s_per_miss = 0.0;  // extra latency per miss above the baseline allocation
  std::uint64_t trace_seed = 0;

  double misses(std::uint32_t w) const { return mpki.at(w) * instructions / 1000.0; }
  double base_busy_time(double f_base_hz) const {
    return (cpi0 + cpi_bp + cpi_cache) * instructions / f_base_hz;
  }

  /// Throws std::invalid_argument on a violated profile invariant.
  void validate() const;
};

struct AppProfile {
  std::string name;
  std::string label;  // archetype the generator aimed for
  std::vector<PhaseProfile> phases;
  std::vector<std::uint32_t> sequence;  // phase id of each interval
  bool repeat = true;                   // restart from the first interval when done

  void validate() const;
};

struct Library {
  std::vector<AppProfile> apps;
};

/// Detailed-simulation stand-in: actual time and energy of one interval of
/// `profile` at `setting`, plus the counters hardware would expose.
struct GroundTruth {
  double time_s = 0.0;
  double energy_j = 0.0;
  double core_dynamic_j = 0.0;
  double core_static_j = 0.0;
  double memory_j = 0.0;
  IntervalStats observed;
};

GroundTruth ground_truth(const PhaseProfile& profile, const ResourceSetting& setting,
                         const SystemParams& sys);

/// MPKI at 0.5x, 1x and 1.5x the baseline allocation and MLP per core size at
/// the baseline allocation.
struct CategorySamples {
  double mpki_low = 0.0;
  double mpki_base = 0.0;
  double mpki_high = 0.0;
  double mlp_s = 1.0;
  double mlp_m = 1.0;
  double mlp_l = 1.0;
};

/// Throws std::invalid_argument for negative MPKI or an MLP below 1.
AppCategory categorize(const CategorySamples& s);
/// Instruction-weighted samples over all phases.
CategorySamples category_samples(const AppProfile& app, const SystemParams& sys);
AppCategory categorize(const AppProfile& app, const SystemParams& sys);

enum class Scenario { S1, S2, S3, S4 };

inline constexpr std::array<Scenario, 4> kScenarios{Scenario::S1, Scenario::S2, Scenario::S3,
                                                    Scenario::S4};
/// Scenario weights for averaging savings.
inline constexpr std::array<double, 4> kScenarioWeights{0.47, 0.221, 0.221, 0.088};

std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);
constexpr std::size_t scenario_index(Scenario s) { return static_cast<std::size_t>(s); }

/// (App1 category, App2 category) cell.
struct ScenarioCell {
  AppCategory first;
  AppCategory second;
};

using ScenarioTable = std::array<std::vector<ScenarioCell>, 4>;

/// S1: any pair with a CS-PS second app, plus (CI-PS, CS-PI).
/// S2: (CS-PI, CS-PI), (CI-PI, CS-PI). S3: (CI-PS, CI-PS), (CI-PI, CI-PS).
/// S4: (CI-PI, CI-PI).
ScenarioTable default_scenario_table();

struct ScenarioSpec {
  Scenario scenario = Scenario::S1;
  std::uint32_t num_cores = 2;
  std::uint64_t seed = 1;
};

struct Workload {
  ScenarioSpec spec;
  std::vector<std::size_t> apps;  // library index per core
};

/// Cores [0, n/2) take App1 and cores [n/2, n) App2 of independently drawn
/// cells. A cell is drawn with probability proportional to the product of
/// its two category populations, so cells with an empty category never
/// appear. Throws std::invalid_argument for an odd core count or when no
/// cell of the scenario can be populated.
Workload build_scenario(const ScenarioSpec& spec, const Library& library,
                        const std::vector<AppCategory>& categories,
                        const ScenarioTable& table = default_scenario_table());

/// Dependency-annotated access trace in ATD arrival order. The first
/// `warmup` entries fill every set and carry no misses of interest.
struct SynthTrace {
  std::vector<TraceEntry> entries;
  std::size_t warmup = 0;
};

/// Loads whose LRU stack position is drawn so that P(position >= w) =
/// mpki(w) / llc_apki; position 16 means a never-seen block. With
/// probability dep_prob a load depends on the latest far load (position at
/// or beyond `far_position`) and arrives no earlier than its producer plus a
/// fixed delay. Throws std::invalid_argument when the MPKI curve is not
/// non-increasing or exceeds llc_apki.
SynthTrace synth_trace(const PhaseProfile& profile, std::size_t loads, std::uint64_t seed,
                       const CacheGeometry& geometry = {}, std::uint32_t far_position = 8);

/// Per-way miss counts and leading-miss counts (exact and heuristic) of a trace.
struct TraceMeasurement {
  WayTable misses{};
  CoreWayTable lm_oracle{};
  CoreWayTable lm_heuristic{};
};

TraceMeasurement measure_trace(const SynthTrace& trace, const CoreTable& cores = kDefaultCores,
                               const CacheGeometry& geometry = {});

/// Fills profile.mlp (made non-decreasing in core size) and
/// profile.mlp_observed from a synthetic trace of the profile.
void realize_mlp(PhaseProfile& profile, const CoreTable& cores = kDefaultCores,
                 const CacheGeometry& geometry = {});

struct LibraryParams {
  /// Apps per category in kCategories order.
  std::array<std::uint32_t, 4> apps_per_category{5, 7, 7, 8};
  std::uint32_t min_phases = 3;
  std::uint32_t max_phases = 8;
  std::uint32_t sequence_length = 100;
  std::uint32_t max_attempts = 400;
};

/// Category-consistent archetype apps; every app's derived category equals
/// its label. Deterministic in `seed`. Throws std::runtime_error if an app
/// cannot be produced within max_attempts.
Library generate_library(const LibraryParams& params, std::uint64_t seed, const SystemParams& sys);
AppProfile generate_app(AppCategory target, const std::string& name, const LibraryParams& params,
                        std::uint64_t seed, const SystemParams& sys);

}  // namespace qosrm
