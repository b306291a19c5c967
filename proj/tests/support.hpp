// Shared fixtures for the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <vector>

#include "qosrm/config.hpp"
#include "qosrm/workload_gen.hpp"

namespace qosrm::testing {

/// Default system and library, generated once per test binary.
inline const SystemParams& default_system() {
  static const SystemParams sys{};
  return sys;
}

inline const Library& default_library() {
  static const Library lib = generate_library(LibraryParams{}, LibrarySource{}.seed, default_system());
  return lib;
}

inline std::vector<AppCategory> library_categories(const Library& lib, const SystemParams& sys) {
  std::vector<AppCategory> out;
  for (const AppProfile& app : lib.apps) out.push_back(categorize(app, sys));
  return out;
}

inline bool rel_close(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= tol * (scale > 0.0 ? scale : 1.0);
}

/// One-phase app that repeats forever.
inline AppProfile single_phase_app(const PhaseProfile& phase, const std::string& name) {
  AppProfile app;
  app.name = name;
  app.label = "synthetic";
  app.phases = {phase};
  app.sequence = {0};
  return app;
}

}  // namespace qosrm::testing
