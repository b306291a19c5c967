// qosrm: command-line front end for the resource-manager simulator.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qosrm/config.hpp"
#include "qosrm/experiment.hpp"
#include "qosrm/oracles/validate.hpp"
#include "qosrm/qos_eval.hpp"

namespace {

using namespace qosrm;
using nlohmann::json;

struct Options {
  std::string config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned parallel = 1;
  bool perfect = false;
  std::string library_out;
};

void add_common(CLI::App& cmd, Options& o, bool with_perfect) {
  cmd.add_option("--config", o.config, "Experiment JSON (defaults when omitted)")->check(CLI::ExistingFile);
  cmd.add_option("--set", o.set, "Override a config field, e.g. system.alpha=1.05");
  cmd.add_option("--seed", o.seed, "Use this single workload seed instead of the configured list");
  if (with_perfect) cmd.add_flag("--perfect-models", o.perfect, "Predictions read from ground truth");
}

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = load_config(o.config, o.set);
  if (o.seed) cfg.seeds = {*o.seed};
  if (o.perfect) cfg.perfect_models = true;
  return cfg;
}

int cmd_simulate(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const Library lib = resolve_library(cfg);
  const Report report = run_experiment(cfg, lib, o.parallel);
  const std::string dir = o.out.empty() ? "results" : o.out;
  write_report(report, dir);
  std::printf("%-6s %-4s %-8s %9s %9s %9s %9s %9s\n", "cores", "rm", "model", "S1", "S2", "S3", "S4", "weighted");
  for (const SummaryRow& s : report.summary) {
    std::printf("%-6u %-4s %-8s", s.cores, std::string(to_string(s.policy)).c_str(), s.model.c_str());
    for (const auto& v : s.mean_savings) {
      if (v) {
        std::printf(" %8.2f%%", 100.0 * *v);
      } else {
        std::printf(" %9s", "-");
      }
    }
    std::printf(" %8.2f%%\n", 100.0 * s.weighted_savings);
  }
  std::printf("%zu runs written to %s\n", report.runs.size(), dir.c_str());
  return 0;
}

int cmd_validate(const Options& o) {
  const auto results = oracles::validate_all(o.seed.value_or(1));
  bool ok = true;
  json rows = json::array();
  for (const auto& r : results) {
    std::printf("%-4s %-26s cases %-6llu mismatches %-6llu %6.2fs  %s\n", r.passed() ? "PASS" : "FAIL",
                r.name.c_str(), static_cast<unsigned long long>(r.cases),
                static_cast<unsigned long long>(r.mismatches), r.seconds, r.detail.c_str());
    ok = ok && r.passed();
    rows.push_back({{"suite", r.name},
                    {"cases", r.cases},
                    {"mismatches", r.mismatches},
                    {"informational", r.informational},
                    {"passed", r.passed()},
                    {"detail", r.detail}});
  }
  if (!o.out.empty()) write_text_file((std::filesystem::path(o.out) / "validate.json").string(), rows.dump(1) + "\n");
  return ok ? 0 : 1;
}

int cmd_qos_eval(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const Library lib = resolve_library(cfg);
  std::vector<QosEvalResult> results;
  if (cfg.perfect_models) {
    results.push_back(qos_eval(lib, cfg.models.front(), cfg.sys, true, cfg.histogram));
  } else {
    for (PerfModel m : cfg.models) results.push_back(qos_eval(lib, m, cfg.sys, false, cfg.histogram));
  }
  std::printf("%-8s %12s %12s %12s\n", "model", "P(viol)", "E[viol]", "sigma");
  for (const QosEvalResult& r : results) {
    std::printf("%-8s %12.6f %12.6f %12.6f\n", r.perfect ? "perfect" : std::string(to_string(r.model)).c_str(),
                r.probability, r.expected_violation, r.stddev_violation);
  }
  const std::string dir = o.out.empty() ? "results" : o.out;
  write_qos_report(results, to_json(cfg), dir);
  return 0;
}

int cmd_categorize(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const Library lib = resolve_library(cfg);
  if (!o.library_out.empty()) save_library(o.library_out, lib);
  std::string csv = "app,label,category,mpki_low,mpki_base,mpki_high,mlp_s,mlp_m,mlp_l\n";
  std::printf("%-10s %-6s %-6s %8s %8s %8s %6s %6s %6s\n", "app", "label", "class", "mpki.5x", "mpki1x", "mpki1.5x",
              "mlpS", "mlpM", "mlpL");
  for (const AppProfile& app : lib.apps) {
    const CategorySamples s = category_samples(app, cfg.sys);
    const std::string cat = to_string(categorize(s));
    std::printf("%-10s %-6s %-6s %8.3f %8.3f %8.3f %6.2f %6.2f %6.2f\n", app.name.c_str(), app.label.c_str(),
                cat.c_str(), s.mpki_low, s.mpki_base, s.mpki_high, s.mlp_s, s.mlp_m, s.mlp_l);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", app.name.c_str(),
                  app.label.c_str(), cat.c_str(), s.mpki_low, s.mpki_base, s.mpki_high, s.mlp_s, s.mlp_m, s.mlp_l);
    csv += buf;
  }
  if (!o.out.empty()) write_text_file((std::filesystem::path(o.out) / "categories.csv").string(), csv);
  return 0;
}

int cmd_scenario_gen(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const Library lib = resolve_library(cfg);
  if (!o.library_out.empty()) save_library(o.library_out, lib);
  json out = json::array();
  for (const Workload& w : build_workloads(cfg, lib)) {
    json apps = json::array();
    for (std::size_t a : w.apps) apps.push_back(lib.apps[a].name);
    out.push_back({{"scenario", to_string(w.spec.scenario)},
                   {"cores", w.spec.num_cores},
                   {"seed", w.spec.seed},
                   {"apps", apps}});
  }
  const std::string text = out.dump(1) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text_file((std::filesystem::path(o.out) / "workloads.json").string(), text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QoS-constrained multicore resource manager simulator"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Run the scenario x policy x model sweep and write reports");
  add_common(*sim, o, true);
  sim->add_option("--out", o.out, "Output directory (default: results)");
  sim->add_option("--parallel", o.parallel, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "Run the oracle suites");
  val->add_option("--seed", o.seed, "Base seed of the suites (default 1)");
  val->add_option("--out", o.out, "Directory for validate.json");

  auto* qos = app.add_subcommand("qos-eval", "QoS-violation statistics of the performance models");
  add_common(*qos, o, true);
  qos->add_option("--out", o.out, "Output directory (default: results)");

  auto* cat = app.add_subcommand("categorize", "Print the derived category of every library app");
  add_common(*cat, o, false);
  cat->add_option("--out", o.out, "Directory for categories.csv");
  cat->add_option("--library-out", o.library_out, "Save the library as JSON");

  auto* gen = app.add_subcommand("scenario-gen", "Print the workloads the configuration produces");
  add_common(*gen, o, false);
  gen->add_option("--out", o.out, "Directory for workloads.json (default: stdout)");
  gen->add_option("--library-out", o.library_out, "Save the library as JSON");

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (val->parsed()) return cmd_validate(o);
    if (qos->parsed()) return cmd_qos_eval(o);
    if (cat->parsed()) return cmd_categorize(o);
    if (gen->parsed()) return cmd_scenario_gen(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
