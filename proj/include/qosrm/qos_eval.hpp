// Model-accuracy study: how often would the resource manager pick a setting
// that is predicted to meet QoS but actually runs slower than the baseline?
//
// Every phase of every app is combined with every current setting (the
// interval whose counters feed the model) and every target setting. A case
// violates QoS when the target is actually slower than the baseline while
// the model predicts it is not. Current and target settings are equally
// likely; phases are weighted by their phase weights and apps equally.
#pragma once

#include <cstdint>
#include <vector>

#include "qosrm/system.hpp"
#include "qosrm/workload_gen.hpp"

namespace qosrm {

struct HistogramSpec {
  std::size_t bins = 20;
  double max_value = 0.5;  // violations above go to the last bin
};

struct QosEvalResult {
  PerfModel model = PerfModel::M3;
  bool perfect = false;
  double probability = 0.0;
  double expected_violation = 0.0;  // mean over violating cases
  double stddev_violation = 0.0;
  std::uint64_t cases = 0;
  std::uint64_t violating_cases = 0;
  double bin_width = 0.0;
  std::vector<double> histogram;  // probability mass per bin
  std::vector<std::uint64_t> histogram_counts;  // violating cases per bin
};

/// Throws std::invalid_argument for an empty library.
QosEvalResult qos_eval(const Library& library, PerfModel model, const SystemParams& sys,
                       bool perfect_models = false, const HistogramSpec& hist = {});

/// All (core, frequency, ways) settings the resource manager can choose.
std::vector<ResourceSetting> all_settings(const SystemParams& sys);

}  // namespace qosrm
