#include <stdexcept>
#include "doctest.h"
#include "qosrm/qos_eval.hpp"
#include "support.hpp"

using namespace qosrm;
using qosrm::testing::default_library;
using qosrm::testing::default_system;

namespace {

Library subset(bool (*keep)(AppCategory), std::size_t limit) {
  const auto cats = qosrm::testing::library_categories(default_library(), default_system());
  Library out;
  for (std::size_t i = 0; i < cats.size() && out.apps.size() < limit; ++i) {
    if (keep(cats[i])) out.apps.push_back(default_library().apps[i]);
  }
  return out;
}

}  // namespace

TEST_CASE("the setting space has 3 core sizes x 10 VF points x 15 allocations") {
  CHECK(all_settings(default_system()).size() == 450);
}

TEST_CASE("perfect models give zero violation probability") {
  const Library lib = subset([](AppCategory) { return true; }, 4);
  const QosEvalResult r = qos_eval(lib, PerfModel::M1, default_system(), true);
  CHECK(r.probability == 0.0);
  CHECK(r.violating_cases == 0);
  CHECK(r.expected_violation == 0.0);
  CHECK(r.cases > 0);
}

TEST_CASE("the leading-miss model violates no more often than the miss-count model on PS apps") {
  const Library lib = subset([](AppCategory c) { return c.parallelism == ParClass::PS; }, 6);
  REQUIRE(lib.apps.size() == 6);
  const QosEvalResult m1 = qos_eval(lib, PerfModel::M1, default_system());
  const QosEvalResult m3 = qos_eval(lib, PerfModel::M3, default_system());
  CHECK(m3.probability <= m1.probability);
  CHECK(m1.probability > 0.0);
}

TEST_CASE("with MLP constant over core size and allocation M2 and M3 agree") {
  Library lib = subset([](AppCategory) { return true; }, 8);
  for (AppProfile& app : lib.apps) {
    for (PhaseProfile& p : app.phases) {
      for (auto& row : p.mlp) row.fill(2.0);
      for (auto& row : p.mlp_observed) row.fill(2.0);
      p.ilp_eff = {0.9, 1.0, 0.9};
    }
  }
  const QosEvalResult m2 = qos_eval(lib, PerfModel::M2, default_system());
  const QosEvalResult m3 = qos_eval(lib, PerfModel::M3, default_system());
  CHECK(m2.probability == doctest::Approx(m3.probability).epsilon(1e-9));
  CHECK(m2.expected_violation == doctest::Approx(m3.expected_violation).epsilon(1e-9));
  CHECK(m2.probability > 0.0);
}

TEST_CASE("histogram mass sums to the probability and statistics are consistent") {
  const Library lib = subset([](AppCategory) { return true; }, 5);
  HistogramSpec h;
  h.bins = 10;
  h.max_value = 0.2;
  const QosEvalResult r = qos_eval(lib, PerfModel::M1, default_system(), false, h);
  REQUIRE(r.histogram.size() == 10);
  double mass = 0.0;
  std::uint64_t counts = 0;
  for (std::size_t i = 0; i < r.histogram.size(); ++i) {
    mass += r.histogram[i];
    counts += r.histogram_counts[i];
  }
  CHECK(mass == doctest::Approx(r.probability).epsilon(1e-12));
  CHECK(counts == r.violating_cases);
  CHECK(r.bin_width == doctest::Approx(0.02));
  CHECK(r.expected_violation > 0.0);
  CHECK(r.stddev_violation >= 0.0);
  std::uint64_t phases = 0;
  for (const AppProfile& a : lib.apps) phases += a.phases.size();
  CHECK(r.cases == phases * 450 * 450);
}

TEST_CASE("empty library and bad histogram are rejected") {
  CHECK_THROWS_AS(qos_eval(Library{}, PerfModel::M3, default_system()), std::invalid_argument);
  const Library lib = subset([](AppCategory) { return true; }, 1);
  HistogramSpec bad;
  bad.bins = 0;
  CHECK_THROWS_AS(qos_eval(lib, PerfModel::M3, default_system(), false, bad), std::invalid_argument);
}
