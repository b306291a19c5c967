#include "qosrm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

namespace qosrm {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Task {
  std::size_t workload;
  Policy policy;
  PerfModel model;
  std::string label;
};

}  // namespace

std::uint64_t RunRecord::counted_violations() const {
  std::uint64_t n = 0;
  for (const AppMetrics& a : metrics.apps) n += a.violations;
  return n;
}

std::vector<Workload> build_workloads(const ExperimentConfig& cfg, const Library& library) {
  std::vector<AppCategory> categories;
  for (const AppProfile& app : library.apps) categories.push_back(categorize(app, cfg.sys));
  std::vector<Workload> out;
  for (std::uint32_t n : cfg.core_counts) {
    for (Scenario sc : cfg.scenarios) {
      for (std::uint64_t seed : cfg.seeds) {
        out.push_back(build_scenario({sc, n, seed}, library, categories, cfg.scenario_table));
      }
    }
  }
  return out;
}

Report run_experiment(const ExperimentConfig& cfg, const Library& library, unsigned parallel) {
  cfg.validate();
  const std::vector<Workload> workloads = build_workloads(cfg, library);

  // Every workload gets an idle reference run first, whether or not Idle is
  // a configured policy.
  std::vector<Task> tasks;
  for (std::size_t w = 0; w < workloads.size(); ++w) {
    tasks.push_back({w, Policy::Idle, cfg.models.front(), "-"});
    for (Policy p : cfg.policies) {
      if (p == Policy::Idle) continue;
      if (cfg.perfect_models) {
        tasks.push_back({w, p, cfg.models.front(), "perfect"});
        continue;
      }
      for (PerfModel m : cfg.models) tasks.push_back({w, p, m, std::string(to_string(m))});
    }
  }

  std::vector<RunMetrics> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const Task& t = tasks[i];
        results[i] = run(workloads[t.workload], library, cfg.sim_config(t.policy, t.model));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Report report;
  report.config = to_json(cfg);
  const bool idle_listed = std::find(cfg.policies.begin(), cfg.policies.end(), Policy::Idle) != cfg.policies.end();
  double idle_energy = 0.0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    if (t.policy == Policy::Idle) idle_energy = results[i].total_energy_j;
    if (t.policy == Policy::Idle && !idle_listed) continue;
    RunRecord r;
    r.workload = workloads[t.workload];
    for (std::size_t a : r.workload.apps) r.app_names.push_back(library.apps[a].name);
    r.policy = t.policy;
    r.model = t.label;
    r.savings = t.policy == Policy::Idle ? 0.0 : 1.0 - results[i].total_energy_j / idle_energy;
    r.metrics = std::move(results[i]);
    report.runs.push_back(std::move(r));
  }
  report.summary = summarize(report.runs);
  return report;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs) {
  std::vector<SummaryRow> rows;
  std::vector<std::array<double, 4>> sums;
  for (const RunRecord& run : runs) {
    const std::uint32_t cores = run.workload.spec.num_cores;
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& r) {
      return r.cores == cores && r.policy == run.policy && r.model == run.model;
    });
    if (it == rows.end()) {
      SummaryRow r;
      r.cores = cores;
      r.policy = run.policy;
      r.model = run.model;
      rows.push_back(r);
      sums.push_back({0.0, 0.0, 0.0, 0.0});
      it = rows.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - rows.begin());
    const std::size_t s = scenario_index(run.workload.spec.scenario);
    sums[idx][s] += run.savings;
    ++it->runs[s];
    it->violations += run.counted_violations();
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SummaryRow& row = rows[i];
    double wsum = 0.0;
    double wtotal = 0.0;
    double plain = 0.0;
    int present = 0;
    for (std::size_t s = 0; s < 4; ++s) {
      if (row.runs[s] == 0) continue;
      const double mean = sums[i][s] / row.runs[s];
      row.mean_savings[s] = mean;
      wsum += kScenarioWeights[s] * mean;
      wtotal += kScenarioWeights[s];
      plain += mean;
      ++present;
    }
    row.weighted_savings = wtotal > 0.0 ? wsum / wtotal : 0.0;
    row.average_savings = present > 0 ? plain / present : 0.0;
  }
  return rows;
}

json to_json(const RunMetrics& m) {
  json apps = json::array();
  for (const AppMetrics& a : m.apps) {
    apps.push_back({{"app", a.app},
                    {"energy_j", a.energy_j},
                    {"overhead_energy_j", a.overhead_energy_j},
                    {"overhead_time_s", a.overhead_time_s},
                    {"finish_time_s", a.finish_time_s},
                    {"intervals", a.intervals},
                    {"violations", a.violations}});
  }
  json violations = json::array();
  for (const Violation& v : m.violations) {
    violations.push_back({{"time_s", v.time_s}, {"core", v.core}, {"value", v.value}});
  }
  return {{"apps", apps},
          {"interval_energy_j", m.interval_energy_j},
          {"rm_energy_j", m.rm_energy_j},
          {"dvfs_energy_j", m.dvfs_energy_j},
          {"resize_energy_j", m.resize_energy_j},
          {"uncore_energy_j", m.uncore_energy_j},
          {"total_energy_j", m.total_energy_j},
          {"end_time_s", m.end_time_s},
          {"rm_invocations", m.rm_invocations},
          {"fallbacks", m.fallbacks},
          {"dvfs_transitions", m.dvfs_transitions},
          {"resizes", m.resizes},
          {"clamped_t0", m.clamped_t0},
          {"violations", violations}};
}

json to_json(const Report& report) {
  json runs = json::array();
  for (const RunRecord& r : report.runs) {
    runs.push_back({{"scenario", to_string(r.workload.spec.scenario)},
                    {"cores", r.workload.spec.num_cores},
                    {"seed", r.workload.spec.seed},
                    {"apps", r.app_names},
                    {"policy", to_string(r.policy)},
                    {"model", r.model},
                    {"savings", r.savings},
                    {"metrics", to_json(r.metrics)}});
  }
  json summary = json::array();
  for (const SummaryRow& s : report.summary) {
    json per = json::object();
    for (Scenario sc : kScenarios) {
      const auto& v = s.mean_savings[scenario_index(sc)];
      per[std::string(to_string(sc))] = v ? json(*v) : json(nullptr);
    }
    summary.push_back({{"cores", s.cores},
                       {"policy", to_string(s.policy)},
                       {"model", s.model},
                       {"mean_savings", per},
                       {"runs", s.runs},
                       {"weighted_savings", s.weighted_savings},
                       {"average_savings", s.average_savings},
                       {"violations", s.violations}});
  }
  return {{"config", report.config}, {"summary", summary}, {"runs", runs}};
}

std::string runs_csv(const Report& report) {
  std::string out =
      "run,scenario,cores,seed,apps,policy,model,total_energy_j,interval_energy_j,overhead_energy_j,"
      "uncore_energy_j,end_time_s,savings,violations,fallbacks\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const RunRecord& r = report.runs[i];
    std::string apps;
    for (const std::string& a : r.app_names) apps += (apps.empty() ? "" : ";") + a;
    const RunMetrics& m = r.metrics;
    out += std::to_string(i) + "," + std::string(to_string(r.workload.spec.scenario)) + "," +
           std::to_string(r.workload.spec.num_cores) + "," + std::to_string(r.workload.spec.seed) + "," +
           apps + "," + std::string(to_string(r.policy)) + "," + r.model + "," + num(m.total_energy_j) + "," +
           num(m.interval_energy_j) + "," + num(m.overhead_energy_j()) + "," + num(m.uncore_energy_j) + "," +
           num(m.end_time_s) + "," + num(r.savings) + "," + std::to_string(r.counted_violations()) + "," +
           std::to_string(m.fallbacks) + "\n";
  }
  return out;
}

std::string summary_csv(const Report& report) {
  std::string out = "cores,policy,model,S1,S2,S3,S4,weighted,average,violations\n";
  for (const SummaryRow& s : report.summary) {
    out += std::to_string(s.cores) + "," + std::string(to_string(s.policy)) + "," + s.model;
    for (const auto& v : s.mean_savings) out += "," + (v ? num(*v) : std::string());
    out += "," + num(s.weighted_savings) + "," + num(s.average_savings) + "," + std::to_string(s.violations) + "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_report(const Report& report, const std::string& dir) {
  const std::filesystem::path d(dir);
  write_text_file((d / "report.json").string(), to_json(report).dump(1) + "\n");
  write_text_file((d / "runs.csv").string(), runs_csv(report));
  write_text_file((d / "summary.csv").string(), summary_csv(report));
  std::string v = "run,time_s,core,value,counted\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const RunMetrics& m = report.runs[i].metrics;
    for (const Violation& x : m.violations) {
      // The log also holds intervals run after an app reached its target.
      const bool counted = x.time_s <= m.apps[x.core].finish_time_s;
      v += std::to_string(i) + "," + num(x.time_s) + "," + std::to_string(x.core) + "," + num(x.value) + "," +
           (counted ? "1" : "0") + "\n";
    }
  }
  write_text_file((d / "violations.csv").string(), v);
}

json to_json(const QosEvalResult& r) {
  return {{"model", r.perfect ? std::string("perfect") : std::string(to_string(r.model))},
          {"probability", r.probability},
          {"expected_violation", r.expected_violation},
          {"stddev_violation", r.stddev_violation},
          {"cases", r.cases},
          {"violating_cases", r.violating_cases},
          {"bin_width", r.bin_width},
          {"histogram", r.histogram},
          {"histogram_counts", r.histogram_counts}};
}

std::string qos_table_csv(const std::vector<QosEvalResult>& results) {
  std::string out = "model,probability,expected_violation,stddev_violation,cases,violating_cases\n";
  for (const QosEvalResult& r : results) {
    out += (r.perfect ? std::string("perfect") : std::string(to_string(r.model))) + "," + num(r.probability) + "," +
           num(r.expected_violation) + "," + num(r.stddev_violation) + "," + std::to_string(r.cases) + "," +
           std::to_string(r.violating_cases) + "\n";
  }
  return out;
}

std::string qos_histogram_csv(const std::vector<QosEvalResult>& results) {
  std::uint64_t peak = 0;
  for (const QosEvalResult& r : results) {
    for (std::uint64_t c : r.histogram_counts) peak = std::max(peak, c);
  }
  std::string out = "model,bin_low,bin_high,probability,count,normalized\n";
  for (const QosEvalResult& r : results) {
    const std::string name = r.perfect ? "perfect" : std::string(to_string(r.model));
    for (std::size_t b = 0; b < r.histogram.size(); ++b) {
      const double norm = peak > 0 ? static_cast<double>(r.histogram_counts[b]) / static_cast<double>(peak) : 0.0;
      out += name + "," + num(b * r.bin_width) + "," + num((b + 1) * r.bin_width) + "," + num(r.histogram[b]) +
             "," + std::to_string(r.histogram_counts[b]) + "," + num(norm) + "\n";
    }
  }
  return out;
}

void write_qos_report(const std::vector<QosEvalResult>& results, const json& config, const std::string& dir) {
  const std::filesystem::path d(dir);
  json rows = json::array();
  for (const QosEvalResult& r : results) rows.push_back(to_json(r));
  write_text_file((d / "qos_eval.json").string(), json{{"config", config}, {"results", rows}}.dump(1) + "\n");
  write_text_file((d / "qos_eval.csv").string(), qos_table_csv(results));
  write_text_file((d / "qos_histogram.csv").string(), qos_histogram_csv(results));
}

}  // namespace qosrm
