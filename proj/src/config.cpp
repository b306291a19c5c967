#include "qosrm/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace qosrm {

using nlohmann::json;

namespace {

// Reads the fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const json& child(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError(where(key) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class T, class Parse>
std::vector<T> parse_names(const json& j, const std::string& path, Parse parse) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  std::vector<T> out;
  for (const json& e : j) {
    if (!e.is_string()) throw ConfigError(path + ": expected names");
    const auto v = parse(e.get<std::string>());
    if (!v) throw ConfigError(path + ": unknown name '" + e.get<std::string>() + "'");
    out.push_back(*v);
  }
  return out;
}

std::optional<PerfModel> parse_model(std::string_view name) {
  for (PerfModel m : {PerfModel::M1, PerfModel::M2, PerfModel::M3}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

CoreSize require_core(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a core size name");
  const auto c = parse_core_size(j.get<std::string>());
  if (!c) throw ConfigError(path + ": unknown core size '" + j.get<std::string>() + "'");
  return *c;
}

AppCategory require_category(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a category name");
  const auto c = parse_category(j.get<std::string>());
  if (!c) throw ConfigError(path + ": unknown category '" + j.get<std::string>() + "'");
  return *c;
}

void parse_cores(const json& j, const std::string& path, CoreTable& cores) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    Section s(j[i], p);
    if (!s.has("size")) throw ConfigError(p + ": missing size");
    CoreConfig& c = cores[index_of(require_core(s.child("size"), p + ".size"))];
    s.get("dispatch_width", c.dispatch_width);
    s.get("rob", c.rob);
    s.get("rs", c.rs);
    s.get("lsq", c.lsq);
    s.done();
  }
}

VfTable parse_vf(const json& j, const std::string& path) {
  Section s(j, path);
  try {
    if (s.has("points")) {
      std::vector<VfPoint> pts;
      const json& arr = s.child("points");
      if (!arr.is_array()) throw ConfigError(path + ".points: expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section p(arr[i], path + ".points[" + std::to_string(i) + "]");
        VfPoint v;
        p.get("frequency_hz", v.frequency_hz);
        p.get("voltage", v.voltage);
        p.done();
        pts.push_back(v);
      }
      s.done();
      return VfTable::from_points(std::move(pts));
    }
    double f_min = 1.0e9, f_step = 0.25e9, v_lo = 0.8, v_hi = 1.25;
    std::size_t levels = 10;
    s.get("f_min_hz", f_min);
    s.get("f_step_hz", f_step);
    s.get("levels", levels);
    s.get("v_at_f_min", v_lo);
    s.get("v_at_f_max", v_hi);
    s.done();
    return VfTable::linear_grid(f_min, f_step, levels, v_lo, v_hi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void parse_system(const json& j, SystemParams& sys) {
  Section s(j, "system");
  if (s.has("cores")) parse_cores(s.child("cores"), "system.cores", sys.cores);
  if (s.has("vf")) sys.vf = parse_vf(s.child("vf"), "system.vf");
  if (s.has("geometry")) {
    Section g(s.child("geometry"), "system.geometry");
    g.get("num_sets", sys.geometry.num_sets);
    g.get("max_ways", sys.geometry.max_ways);
    g.get("block_size_bytes", sys.geometry.block_size_bytes);
    g.done();
  }
  s.get("ways_per_core", sys.ways_per_core);
  if (s.has("way_range")) {
    Section w(s.child("way_range"), "system.way_range");
    w.get("min", sys.way_range.min);
    w.get("max", sys.way_range.max);
    w.done();
  }
  if (s.has("baseline")) {
    Section b(s.child("baseline"), "system.baseline");
    if (b.has("core")) sys.baseline.core = require_core(b.child("core"), "system.baseline.core");
    b.get("frequency_hz", sys.baseline.frequency_hz);
    b.get("ways", sys.baseline.ways);
    b.done();
  }
  s.get("alpha", sys.alpha);
  s.get("static_coeff_w", sys.static_coeff_w);
  s.get("epi_ratio", sys.epi_ratio);
  s.get("stall_power_factor", sys.stall_power_factor);
  s.get("l_mem_s", sys.l_mem_s);
  s.get("e_mem_j", sys.e_mem_j);
  s.get("uncore_power_w", sys.uncore_power_w);
  s.get("per_core_power_sampling", sys.per_core_power_sampling);
  if (s.has("dyn_power_scaling")) {
    std::string v;
    s.get("dyn_power_scaling", v);
    if (v == "v2") {
      sys.dyn_power_scaling = DynPowerScaling::Voltage;
    } else if (v == "v2f") {
      sys.dyn_power_scaling = DynPowerScaling::VoltageFrequency;
    } else {
      throw ConfigError("system.dyn_power_scaling: expected 'v2' or 'v2f'");
    }
  }
  s.get("interval_instructions", sys.interval_instructions);
  s.get("target_intervals", sys.target_intervals);
  s.done();
}

void parse_workloads(const json& j, ExperimentConfig& cfg) {
  Section s(j, "workloads");
  if (s.has("library")) {
    Section l(s.child("library"), "workloads.library");
    std::string path;
    if (l.has("path")) {
      l.get("path", path);
      cfg.library.path = path;
    }
    l.get("seed", cfg.library.seed);
    l.get("apps_per_category", cfg.library.params.apps_per_category);
    l.get("min_phases", cfg.library.params.min_phases);
    l.get("max_phases", cfg.library.params.max_phases);
    l.get("sequence_length", cfg.library.params.sequence_length);
    l.get("max_attempts", cfg.library.params.max_attempts);
    l.done();
  }
  if (s.has("scenarios")) {
    cfg.scenarios = parse_names<Scenario>(s.child("scenarios"), "workloads.scenarios", parse_scenario);
  }
  s.get("cores", cfg.core_counts);
  if (s.has("scenario_table")) {
    Section t(s.child("scenario_table"), "workloads.scenario_table");
    for (Scenario sc : kScenarios) {
      const std::string name(to_string(sc));
      if (!t.has(name)) continue;
      const json& cells = t.child(name);
      const std::string p = "workloads.scenario_table." + name;
      if (!cells.is_array()) throw ConfigError(p + ": expected an array of pairs");
      std::vector<ScenarioCell> out;
      for (const json& cell : cells) {
        if (!cell.is_array() || cell.size() != 2) throw ConfigError(p + ": expected [App1, App2] pairs");
        out.push_back({require_category(cell[0], p), require_category(cell[1], p)});
      }
      cfg.scenario_table[scenario_index(sc)] = std::move(out);
    }
    t.done();
  }
  s.done();
}

void parse_overrides(const json& j, ExperimentConfig& cfg) {
  Section s(j, "overrides");
  s.get("perfect_models", cfg.perfect_models);
  if (s.has("charge_overheads")) {
    bool v = true;
    s.get("charge_overheads", v);
    cfg.charge_overheads = v;
  }
  s.get("apply_all", cfg.apply_all);
  if (s.has("qos_baseline")) {
    std::string v;
    s.get("qos_baseline", v);
    if (v == "repredicted") {
      cfg.qos_baseline = QosBaseline::Repredicted;
    } else if (v == "anchored") {
      cfg.qos_baseline = QosBaseline::Anchored;
    } else {
      throw ConfigError("overrides.qos_baseline: expected 'repredicted' or 'anchored'");
    }
  }
  if (s.has("overheads")) {
    Section o(s.child("overheads"), "overrides.overheads");
    if (o.has("rm_instructions")) {
      const json& m = o.child("rm_instructions");
      if (!m.is_object()) throw ConfigError("overrides.overheads.rm_instructions: expected an object");
      cfg.overheads.rm_instructions.clear();
      for (const auto& [key, value] : m.items()) {
        try {
          cfg.overheads.rm_instructions[static_cast<std::uint32_t>(std::stoul(key))] = value.get<double>();
        } catch (const std::exception&) {
          throw ConfigError("overrides.overheads.rm_instructions." + key + ": expected a number keyed by core count");
        }
      }
    }
    o.get("dvfs_time_s", cfg.overheads.dvfs_time_s);
    o.get("dvfs_energy_j", cfg.overheads.dvfs_energy_j);
    o.get("resize_drain", cfg.overheads.resize_drain);
    o.done();
  }
  if (s.has("histogram")) {
    Section h(s.child("histogram"), "overrides.histogram");
    h.get("bins", cfg.histogram.bins);
    h.get("max_value", cfg.histogram.max_value);
    h.done();
  }
  s.done();
}

json phase_to_json(const PhaseProfile& p) {
  return {{"weight", p.weight},
          {"instructions", p.instructions},
          {"cpi0", p.cpi0},
          {"cpi_bp", p.cpi_bp},
          {"cpi_cache", p.cpi_cache},
          {"mpki", p.mpki},
          {"llc_apki", p.llc_apki},
          {"extra_mem_pki", p.extra_mem_pki},
          {"dep_prob", p.dep_prob},
          {"mlp", p.mlp},
          {"mlp_observed", p.mlp_observed},
          {"ilp_eff", p.ilp_eff},
          {"p_dyn_base_w", p.p_dyn_base_w},
          {"contention_s_per_miss", p.contention_s_per_miss},
          {"trace_seed", p.trace_seed}};
}

PhaseProfile phase_from_json(const json& j, const std::string& path) {
  PhaseProfile p;
  Section s(j, path);
  s.get("weight", p.weight);
  s.get("instructions", p.instructions);
  s.get("cpi0", p.cpi0);
  s.get("cpi_bp", p.cpi_bp);
  s.get("cpi_cache", p.cpi_cache);
  s.get("mpki", p.mpki);
  s.get("llc_apki", p.llc_apki);
  s.get("extra_mem_pki", p.extra_mem_pki);
  s.get("dep_prob", p.dep_prob);
  s.get("mlp", p.mlp);
  s.get("mlp_observed", p.mlp_observed);
  s.get("ilp_eff", p.ilp_eff);
  s.get("p_dyn_base_w", p.p_dyn_base_w);
  s.get("contention_s_per_miss", p.contention_s_per_miss);
  s.get("trace_seed", p.trace_seed);
  s.done();
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

SimConfig ExperimentConfig::sim_config(Policy policy, PerfModel model) const {
  SimConfig c;
  c.sys = sys;
  c.policy = policy;
  c.model = model;
  c.perfect_models = perfect_models;
  c.charge_overheads = overheads_enabled();
  c.overheads = overheads;
  c.apply_all = apply_all;
  c.qos_baseline = qos_baseline;
  return c;
}

void ExperimentConfig::validate() const {
  if (policies.empty()) throw ConfigError("policies: at least one policy required");
  if (models.empty()) throw ConfigError("models: at least one model required");
  if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
  if (scenarios.empty()) throw ConfigError("workloads.scenarios: at least one scenario required");
  if (core_counts.empty()) throw ConfigError("workloads.cores: at least one core count required");
  for (std::uint32_t n : core_counts) {
    if (n < 2 || n % 2 != 0) throw ConfigError("workloads.cores: core counts must be even and >= 2");
    if (sys.way_range.min * n > sys.total_ways(n)) {
      throw ConfigError("workloads.cores: minimum allocation exceeds the cache for " + std::to_string(n) + " cores");
    }
  }
  if (histogram.bins == 0 || !(histogram.max_value > 0.0)) {
    throw ConfigError("overrides.histogram: bins and max_value must be positive");
  }
  try {
    sys.validate();
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  Section root(doc, "");
  if (root.has("system")) parse_system(root.child("system"), cfg.sys);
  if (root.has("workloads")) parse_workloads(root.child("workloads"), cfg);
  if (root.has("policies")) cfg.policies = parse_names<Policy>(root.child("policies"), "policies", parse_policy);
  if (root.has("models")) cfg.models = parse_names<PerfModel>(root.child("models"), "models", parse_model);
  root.get("seeds", cfg.seeds);
  if (root.has("overrides")) parse_overrides(root.child("overrides"), cfg);
  root.done();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& assignments) {
  json doc = path.empty() ? json::object() : parse_json_file(path);
  for (const std::string& a : assignments) apply_assignment(doc, a);
  ExperimentConfig cfg = parse_config(doc);
  if (!path.empty() && cfg.library.path && std::filesystem::path(*cfg.library.path).is_relative()) {
    cfg.library.path = (std::filesystem::path(path).parent_path() / *cfg.library.path).string();
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const SystemParams& s = cfg.sys;
  json cores = json::array();
  for (const CoreConfig& c : s.cores) {
    cores.push_back({{"size", to_string(c.size)},
                     {"dispatch_width", c.dispatch_width},
                     {"rob", c.rob},
                     {"rs", c.rs},
                     {"lsq", c.lsq}});
  }
  json points = json::array();
  for (const VfPoint& p : s.vf.points()) points.push_back({{"frequency_hz", p.frequency_hz}, {"voltage", p.voltage}});
  json system = {
      {"cores", cores},
      {"vf", {{"points", points}}},
      {"geometry",
       {{"num_sets", s.geometry.num_sets},
        {"max_ways", s.geometry.max_ways},
        {"block_size_bytes", s.geometry.block_size_bytes}}},
      {"ways_per_core", s.ways_per_core},
      {"way_range", {{"min", s.way_range.min}, {"max", s.way_range.max}}},
      {"baseline",
       {{"core", to_string(s.baseline.core)},
        {"frequency_hz", s.baseline.frequency_hz},
        {"ways", s.baseline.ways}}},
      {"alpha", s.alpha},
      {"static_coeff_w", s.static_coeff_w},
      {"epi_ratio", s.epi_ratio},
      {"stall_power_factor", s.stall_power_factor},
      {"l_mem_s", s.l_mem_s},
      {"e_mem_j", s.e_mem_j},
      {"uncore_power_w", s.uncore_power_w},
      {"per_core_power_sampling", s.per_core_power_sampling},
      {"dyn_power_scaling", s.dyn_power_scaling == DynPowerScaling::Voltage ? "v2" : "v2f"},
      {"interval_instructions", s.interval_instructions},
      {"target_intervals", s.target_intervals}};

  json library = {{"seed", cfg.library.seed},
                  {"apps_per_category", cfg.library.params.apps_per_category},
                  {"min_phases", cfg.library.params.min_phases},
                  {"max_phases", cfg.library.params.max_phases},
                  {"sequence_length", cfg.library.params.sequence_length},
                  {"max_attempts", cfg.library.params.max_attempts}};
  if (cfg.library.path) library["path"] = *cfg.library.path;
  json scenarios = json::array();
  for (Scenario sc : cfg.scenarios) scenarios.push_back(to_string(sc));
  json table = json::object();
  for (Scenario sc : kScenarios) {
    json cells = json::array();
    for (const ScenarioCell& c : cfg.scenario_table[scenario_index(sc)]) {
      cells.push_back({to_string(c.first), to_string(c.second)});
    }
    table[std::string(to_string(sc))] = cells;
  }

  json policies = json::array();
  for (Policy p : cfg.policies) policies.push_back(to_string(p));
  json models = json::array();
  for (PerfModel m : cfg.models) models.push_back(to_string(m));

  json rm_instr = json::object();
  for (const auto& [n, v] : cfg.overheads.rm_instructions) rm_instr[std::to_string(n)] = v;
  json overrides = {
      {"perfect_models", cfg.perfect_models},
      {"charge_overheads", cfg.overheads_enabled()},
      {"apply_all", cfg.apply_all},
      {"qos_baseline", cfg.qos_baseline == QosBaseline::Anchored ? "anchored" : "repredicted"},
      {"overheads",
       {{"rm_instructions", rm_instr},
        {"dvfs_time_s", cfg.overheads.dvfs_time_s},
        {"dvfs_energy_j", cfg.overheads.dvfs_energy_j},
        {"resize_drain", cfg.overheads.resize_drain}}},
      {"histogram", {{"bins", cfg.histogram.bins}, {"max_value", cfg.histogram.max_value}}}};

  return {{"system", system},
          {"workloads",
           {{"library", library}, {"scenarios", scenarios}, {"cores", cfg.core_counts}, {"scenario_table", table}}},
          {"policies", policies},
          {"models", models},
          {"seeds", cfg.seeds},
          {"overrides", overrides}};
}

void apply_assignment(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed key '" + key + "'");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError("'" + key + "' does not name an object field");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

json to_json(const Library& library) {
  json apps = json::array();
  for (const AppProfile& a : library.apps) {
    json phases = json::array();
    for (const PhaseProfile& p : a.phases) phases.push_back(phase_to_json(p));
    apps.push_back({{"name", a.name},
                    {"label", a.label},
                    {"repeat", a.repeat},
                    {"sequence", a.sequence},
                    {"phases", phases}});
  }
  return {{"apps", apps}};
}

Library library_from_json(const json& doc) {
  Library lib;
  Section root(doc, "library");
  if (!root.has("apps")) throw ConfigError("library: missing apps");
  const json& apps = root.child("apps");
  if (!apps.is_array()) throw ConfigError("library.apps: expected an array");
  root.done();
  for (std::size_t i = 0; i < apps.size(); ++i) {
    const std::string path = "library.apps[" + std::to_string(i) + "]";
    Section s(apps[i], path);
    AppProfile a;
    s.get("name", a.name);
    s.get("label", a.label);
    s.get("repeat", a.repeat);
    s.get("sequence", a.sequence);
    if (!s.has("phases") || !s.child("phases").is_array()) throw ConfigError(path + ".phases: expected an array");
    const json& phases = s.child("phases");
    for (std::size_t k = 0; k < phases.size(); ++k) {
      a.phases.push_back(phase_from_json(phases[k], path + ".phases[" + std::to_string(k) + "]"));
    }
    s.done();
    try {
      a.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ": " + e.what());
    }
    lib.apps.push_back(std::move(a));
  }
  return lib;
}

void save_library(const std::string& path, const Library& library) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << to_json(library).dump(1) << '\n';
}

Library load_library(const std::string& path) { return library_from_json(parse_json_file(path)); }

Library resolve_library(const ExperimentConfig& cfg) {
  Library lib = cfg.library.path ? load_library(*cfg.library.path)
                                 : generate_library(cfg.library.params, cfg.library.seed, cfg.sys);
  if (lib.apps.empty()) throw ConfigError("empty app library");
  return lib;
}

}  // namespace qosrm
