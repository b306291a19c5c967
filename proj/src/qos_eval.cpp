#include "qosrm/qos_eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qosrm/sim_engine.hpp"

namespace qosrm {

std::vector<ResourceSetting> all_settings(const SystemParams& sys) {
  std::vector<ResourceSetting> out;
  for (CoreSize c : kCoreSizes) {
    for (const VfPoint& p : sys.vf.points()) {
      for (std::uint32_t w = sys.way_range.min; w <= sys.way_range.max; ++w) {
        out.push_back({c, p.frequency_hz, w});
      }
    }
  }
  return out;
}

QosEvalResult qos_eval(const Library& library, PerfModel model, const SystemParams& sys,
                       bool perfect_models, const HistogramSpec& hist) {
  if (library.apps.empty()) throw std::invalid_argument("empty app library");
  if (hist.bins == 0 || hist.max_value <= 0.0) throw std::invalid_argument("invalid histogram");
  sys.validate();

  const auto settings = all_settings(sys);
  const double pairs = static_cast<double>(settings.size()) * static_cast<double>(settings.size());
  QosEvalResult r;
  r.model = model;
  r.perfect = perfect_models;
  r.bin_width = hist.max_value / static_cast<double>(hist.bins);
  r.histogram.assign(hist.bins, 0.0);
  r.histogram_counts.assign(hist.bins, 0);

  double mass = 0.0;
  double sum_v = 0.0;
  double sum_v2 = 0.0;
  std::vector<double> actual(settings.size());
  for (const AppProfile& app : library.apps) {
    app.validate();
    for (const PhaseProfile& phase : app.phases) {
      const double case_weight = phase.weight / static_cast<double>(library.apps.size()) / pairs;
      const double t_base = ground_truth(phase, sys.baseline, sys).time_s;
      for (std::size_t k = 0; k < settings.size(); ++k) {
        actual[k] = ground_truth(phase, settings[k], sys).time_s;
      }
      for (const ResourceSetting& current : settings) {
        const IntervalStats stats = ground_truth(phase, current, sys).observed;
        const double pred_base =
            perfect_models ? t_base : predict_time(stats, sys.baseline, sys.cores, model, sys.l_mem_s);
        for (std::size_t k = 0; k < settings.size(); ++k) {
          ++r.cases;
          if (!(actual[k] > t_base)) continue;
          const double pred =
              perfect_models ? actual[k]
                             : predict_time(stats, settings[k], sys.cores, model, sys.l_mem_s);
          if (pred > sys.alpha * pred_base) continue;
          const double v = violation_value(actual[k], t_base);
          ++r.violating_cases;
          mass += case_weight;
          sum_v += case_weight * v;
          sum_v2 += case_weight * v * v;
          const auto bin = std::min(hist.bins - 1, static_cast<std::size_t>(v / r.bin_width));
          r.histogram[bin] += case_weight;
          ++r.histogram_counts[bin];
        }
      }
    }
  }
  r.probability = mass;
  if (mass > 0.0) {
    r.expected_violation = sum_v / mass;
    r.stddev_violation = std::sqrt(std::max(0.0, sum_v2 / mass - r.expected_violation * r.expected_violation));
  }
  return r;
}

}  // namespace qosrm
