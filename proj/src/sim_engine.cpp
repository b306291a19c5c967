#include "qosrm/sim_engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace qosrm {

double OverheadModel::rm_instructions_for(std::uint32_t cores) const {
  if (rm_instructions.empty()) return 0.0;
  const auto it = rm_instructions.lower_bound(cores);
  return it == rm_instructions.end() ? std::prev(it)->second : it->second;
}

double violation_value(double t_actual_target, double t_actual_base) {
  if (!(t_actual_base > 0.0)) throw std::invalid_argument("baseline time must be positive");
  return (t_actual_target - t_actual_base) / t_actual_base;
}

namespace {

struct CoreState {
  const AppProfile* app = nullptr;
  std::uint64_t executed = 0;  // closed intervals, including uncounted ones
  std::uint32_t phase = 0;
  ResourceSetting setting;
  double interval_start = 0.0;
  double seg_start = 0.0;
  double progress = 0.0;  // fraction of the interval done before seg_start
  double energy = 0.0;    // energy of the interval accrued before seg_start
  double seg_time = 0.0;  // full-interval time and energy at the current setting
  double seg_energy = 0.0;
  double next_boundary = 0.0;
  bool done = false;
};

std::uint32_t phase_at(const AppProfile& app, std::uint64_t k) {
  const std::size_t n = app.sequence.size();
  return app.sequence[app.repeat ? k % n : std::min<std::uint64_t>(k, n - 1)];
}

class Engine {
 public:
  Engine(const std::vector<const AppProfile*>& apps, const SimConfig& cfg)
      : cfg_(cfg), sys_(cfg.sys), ctx_(model_context(cfg.sys)) {
    if (apps.empty()) throw std::invalid_argument("workload has no applications");
    sys_.validate();
    const auto n = static_cast<std::uint32_t>(apps.size());
    cores_.resize(n);
    metrics_.apps.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      if (apps[i] == nullptr) throw std::invalid_argument("null application");
      apps[i]->validate();
      cores_[i].app = apps[i];
      cores_[i].setting = sys_.baseline;
      cores_[i].phase = phase_at(*apps[i], 0);
      metrics_.apps[i].app = apps[i]->name;
      begin_segment(i, 0.0);
    }
    rm_instructions_ = cfg.overheads.rm_instructions_for(n);
    if (cfg.policy != Policy::Idle) {
      rm_.emplace(n, sys_.total_ways(n), sys_.baseline, sys_.way_range);
    }
  }

  RunMetrics run() {
    const std::uint32_t target = sys_.target_intervals;
    std::size_t remaining = cores_.size();
    while (remaining > 0) {
      std::uint32_t j = 0;
      for (std::uint32_t i = 1; i < cores_.size(); ++i) {
        if (cores_[i].next_boundary < cores_[j].next_boundary) j = i;
      }
      CoreState& core = cores_[j];
      AppMetrics& am = metrics_.apps[j];
      const double t = core.next_boundary;

      // Close the interval.
      const double e_interval = core.energy + (1.0 - core.progress) * core.seg_energy;
      const double t_actual = t - core.interval_start;
      const PhaseProfile& closing = core.app->phases[core.phase];
      const double t_base = ground_truth(closing, sys_.baseline, sys_).time_s;
      if (t_actual > t_base * (1.0 + 1e-9)) {
        metrics_.violations.push_back({t, j, violation_value(t_actual, t_base)});
        if (!core.done) ++am.violations;
      }
      if (!core.done) {
        am.energy_j += e_interval;
        metrics_.interval_energy_j += e_interval;
        if (++am.intervals == target) {
          core.done = true;
          am.finish_time_s = t;
          --remaining;
        }
      }
      ++core.executed;
      const std::uint32_t next_phase = phase_at(*core.app, core.executed);

      ResourceSetting next_setting = core.setting;
      if (rm_) {
        const EnergyCurve curve = local_curve(core, closing, next_phase);
        const Allocation alloc = rm_->step(j, curve);
        ++metrics_.rm_invocations;
        if (alloc.fallback) ++metrics_.fallbacks;
        if (!core.done) charge_rm(j);
        for (std::uint32_t k = 0; k < cores_.size(); ++k) {
          const ResourceSetting& s = alloc.settings[k];
          const bool f_changed = s.frequency_hz != cores_[k].setting.frequency_hz;
          if (f_changed || cfg_.apply_all) charge_dvfs(k);
          if (s.core != cores_[k].setting.core) charge_resize(k);
          if (k == j) {
            next_setting = s;
          } else if (!(s == cores_[k].setting)) {
            change_setting(k, t, s);
          }
        }
      }

      core.setting = next_setting;
      core.phase = next_phase;
      core.interval_start = t;
      core.progress = 0.0;
      core.energy = 0.0;
      begin_segment(j, t);
      if (cfg_.record_events) metrics_.events.push_back({t, j, next_setting});
    }

    for (const AppMetrics& am : metrics_.apps) {
      metrics_.end_time_s = std::max(metrics_.end_time_s, am.finish_time_s);
    }
    metrics_.uncore_energy_j = sys_.uncore_power_w * metrics_.end_time_s;
    metrics_.total_energy_j =
        metrics_.interval_energy_j + metrics_.overhead_energy_j() + metrics_.uncore_energy_j;
    metrics_.clamped_t0 = diag_.clamped_t0;
    return std::move(metrics_);
  }

 private:
  void begin_segment(std::uint32_t i, double t) {
    CoreState& c = cores_[i];
    const GroundTruth g = ground_truth(c.app->phases[c.phase], c.setting, sys_);
    c.seg_time = g.time_s;
    c.seg_energy = g.energy_j;
    c.seg_start = t;
    c.next_boundary = t + (1.0 - c.progress) * c.seg_time;
  }

  void change_setting(std::uint32_t i, double t, const ResourceSetting& s) {
    CoreState& c = cores_[i];
    const double frac = std::min(1.0 - c.progress, (t - c.seg_start) / c.seg_time);
    c.progress += frac;
    c.energy += frac * c.seg_energy;
    c.setting = s;
    begin_segment(i, t);
  }

  EnergyCurve local_curve(const CoreState& core, const PhaseProfile& closing,
                          std::uint32_t next_phase) {
    if (cfg_.perfect_models) {
      const PhaseProfile& next = core.app->phases[next_phase];
      const double limit = sys_.alpha * ground_truth(next, sys_.baseline, sys_).time_s;
      // The oracle predicts the energy the run will charge, which is nothing
      // once the app has reached its target.
      const bool counted = !core.done;
      const auto predictor = [&](const ResourceSetting& s) {
        const GroundTruth g = ground_truth(next, s, sys_);
        return Prediction{g.time_s, counted ? g.energy_j : 0.0};
      };
      return local_optimize(predictor, limit, cfg_.policy, sys_.baseline, sys_.vf, sys_.way_range);
    }
    const IntervalStats stats = ground_truth(closing, core.setting, sys_).observed;
    if (cfg_.qos_baseline == QosBaseline::Repredicted) {
      return local_optimize(stats, cfg_.policy, sys_.baseline, cfg_.model, ctx_, &diag_);
    }
    const double limit = sys_.alpha * ground_truth(closing, sys_.baseline, sys_).time_s;
    const auto predictor = [&](const ResourceSetting& s) {
      Prediction p;
      p.time_s = predict_time(stats, s, ctx_.cores, cfg_.model, ctx_.l_mem_s, &diag_);
      p.energy_j = predict_energy(stats, s, p.time_s, ctx_.power, ctx_.e_mem_j, stats.w_current, ctx_.dyn_scaling);
      return p;
    };
    return local_optimize(predictor, limit, cfg_.policy, sys_.baseline, sys_.vf, sys_.way_range);
  }

  // Time per instruction and core power at the core's current phase and setting.
  struct Rates {
    double time_per_instruction;
    double core_power_w;
    double frequency_hz;
    std::uint32_t rob;
  };
  Rates rates(std::uint32_t i) const {
    const CoreState& c = cores_[i];
    const PhaseProfile& p = c.app->phases[c.phase];
    const GroundTruth g = ground_truth(p, c.setting, sys_);
    return {g.time_s / p.instructions, (g.core_dynamic_j + g.core_static_j) / g.time_s,
            c.setting.frequency_hz, sys_.cores[index_of(c.setting.core)].rob};
  }

  void charge(std::uint32_t i, double time_s, double energy_j, double& bucket) {
    if (!cfg_.charge_overheads || cores_[i].done) return;
    metrics_.apps[i].overhead_time_s += time_s;
    metrics_.apps[i].overhead_energy_j += energy_j;
    bucket += energy_j;
  }

  void charge_rm(std::uint32_t i) {
    const Rates r = rates(i);
    const double time = rm_instructions_ * r.time_per_instruction;
    charge(i, time, time * r.core_power_w, metrics_.rm_energy_j);
  }

  void charge_dvfs(std::uint32_t i) {
    ++metrics_.dvfs_transitions;
    charge(i, cfg_.overheads.dvfs_time_s, cfg_.overheads.dvfs_energy_j, metrics_.dvfs_energy_j);
  }

  void charge_resize(std::uint32_t i) {
    ++metrics_.resizes;
    if (!cfg_.overheads.resize_drain) return;
    const Rates r = rates(i);
    // rob / IPC cycles = rob instructions at the observed rate.
    const double time = r.rob * r.time_per_instruction;
    charge(i, time, time * r.core_power_w, metrics_.resize_energy_j);
  }

  const SimConfig& cfg_;
  SystemParams sys_;
  ModelContext ctx_;
  ModelDiagnostics diag_;
  std::vector<CoreState> cores_;
  std::optional<ResourceManager> rm_;
  double rm_instructions_ = 0.0;
  RunMetrics metrics_;
};

}  // namespace

RunMetrics run(const std::vector<const AppProfile*>& apps, const SimConfig& config) {
  Engine engine(apps, config);
  return engine.run();
}

RunMetrics run(const Workload& workload, const Library& library, const SimConfig& config) {
  std::vector<const AppProfile*> apps;
  for (std::size_t idx : workload.apps) apps.push_back(&library.apps.at(idx));
  return run(apps, config);
}

}  // namespace qosrm
