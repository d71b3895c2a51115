// lsm_cli: simulate ND maps, reconstruct inclusion support, run the oracle suite.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsm/lsm.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kManifestFormat = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure reported by the library, carrying its status.
struct LibraryError : std::runtime_error {
  lsm_status status;
  LibraryError(lsm_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(lsm_status s, const char* what) {
  if (s != LSM_OK) throw LibraryError(s, std::string(what) + ": " + lsm_last_error());
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Mesh = Handle<lsm_mesh, lsm_mesh_free>;
using Scenario = Handle<lsm_scenario, lsm_scenario_free>;
using NdMap = Handle<lsm_ndmap, lsm_ndmap_free>;
using Relative = Handle<lsm_relative_data, lsm_relative_data_free>;
using Indicator = Handle<lsm_indicator_map, lsm_indicator_map_free>;
using Mask = Handle<lsm_mask, lsm_mask_free>;
using Report = Handle<lsm_verify_report, lsm_verify_report_free>;

// ---------------------------------------------------------------------------
// configuration document

struct RunConfig {
  fs::path base;  // directory of the config file
  std::optional<json> scenario_inline;
  std::string scenario_path;
  std::optional<double> h_target;
  int order = 16;
  double noise_level = 0.0;
  std::uint64_t noise_seed = 0;
  double spacing = 0.05;
  double r_max = 0.9;
  double epsilon = 1e-2;
  std::string cutoff_rule = "multiplier";
  std::optional<double> cutoff_value;
  std::string directions = "max";
  int density_nodes = 0;
  double density_radius = 2.0;
  std::string measured_path;
  std::string background_path;
  std::string out = "lsm_out";
  int threads = 1;
};

[[noreturn]] void config_fail(const std::string& field, const std::string& msg) {
  throw ConfigError("config field '" + field + "': " + msg);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) config_fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

const json& object_at(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_object()) config_fail(key, "expected an object");
  return v;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) config_fail(field, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) config_fail(field, "expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& field) {
  if (!v.is_string()) config_fail(field, "expected a string");
  return v.get<std::string>();
}

RunConfig parse_config(const json& doc, const fs::path& base) {
  if (!doc.is_object()) config_fail("<root>", "expected an object");
  reject_unknown(doc, "", {"scenario", "mesh", "N", "noise", "grid", "delta_rule", "cutoff", "directions", "density",
                           "data", "out", "threads"});
  RunConfig c;
  c.base = base;
  if (doc.contains("scenario")) {
    const json& s = doc["scenario"];
    if (s.is_object()) c.scenario_inline = s;
    else c.scenario_path = text(s, "scenario");
  }
  if (doc.contains("mesh")) {
    const json& m = object_at(doc, "mesh");
    reject_unknown(m, "mesh", {"h_target"});
    if (m.contains("h_target")) c.h_target = number(m["h_target"], "mesh.h_target");
  }
  if (doc.contains("N")) c.order = integer(doc["N"], "N");
  if (doc.contains("noise")) {
    const json& n = object_at(doc, "noise");
    reject_unknown(n, "noise", {"level", "seed"});
    if (n.contains("level")) c.noise_level = number(n["level"], "noise.level");
    if (n.contains("seed")) {
      if (!n["seed"].is_number_unsigned()) config_fail("noise.seed", "expected a non-negative integer");
      c.noise_seed = n["seed"].get<std::uint64_t>();
    }
  }
  if (doc.contains("grid")) {
    const json& g = object_at(doc, "grid");
    reject_unknown(g, "grid", {"spacing", "r_max"});
    if (g.contains("spacing")) c.spacing = number(g["spacing"], "grid.spacing");
    if (g.contains("r_max")) c.r_max = number(g["r_max"], "grid.r_max");
  }
  if (doc.contains("delta_rule")) {
    const json& d = object_at(doc, "delta_rule");
    reject_unknown(d, "delta_rule", {"epsilon"});
    if (d.contains("epsilon")) c.epsilon = number(d["epsilon"], "delta_rule.epsilon");
  }
  if (doc.contains("cutoff")) {
    const json& r = object_at(doc, "cutoff");
    reject_unknown(r, "cutoff", {"rule", "value"});
    if (r.contains("rule")) c.cutoff_rule = text(r["rule"], "cutoff.rule");
    if (r.contains("value")) c.cutoff_value = number(r["value"], "cutoff.value");
  }
  if (doc.contains("directions")) c.directions = text(doc["directions"], "directions");
  if (doc.contains("density")) {
    const json& d = object_at(doc, "density");
    reject_unknown(d, "density", {"radius", "nodes"});
    c.density_nodes = 128;
    if (d.contains("nodes")) c.density_nodes = integer(d["nodes"], "density.nodes");
    if (d.contains("radius")) c.density_radius = number(d["radius"], "density.radius");
  }
  if (doc.contains("data")) {
    const json& d = object_at(doc, "data");
    reject_unknown(d, "data", {"measured", "background"});
    if (d.contains("measured")) c.measured_path = text(d["measured"], "data.measured");
    if (d.contains("background")) c.background_path = text(d["background"], "data.background");
  }
  if (doc.contains("out")) c.out = text(doc["out"], "out");
  if (doc.contains("threads")) c.threads = integer(doc["threads"], "threads");
  return c;
}

void validate(const RunConfig& c) {
  if (c.h_target && !(*c.h_target > 0.0 && *c.h_target <= 0.5)) config_fail("mesh.h_target", "must lie in (0, 0.5]");
  if (c.order < 1) config_fail("N", "must be at least 1");
  if (!(c.noise_level >= 0.0 && c.noise_level < 1.0)) config_fail("noise.level", "must lie in [0, 1)");
  if (!(c.spacing > 0.0)) config_fail("grid.spacing", "must be positive");
  if (!(c.r_max >= 0.0 && c.r_max <= 0.9)) config_fail("grid.r_max", "must lie in [0, 0.9]");
  if (!(c.epsilon > 0.0)) config_fail("delta_rule.epsilon", "must be positive");
  if (c.cutoff_rule != "multiplier" && c.cutoff_rule != "quantile" && c.cutoff_rule != "alpha")
    config_fail("cutoff.rule", "expected multiplier, quantile or alpha");
  if (c.cutoff_value) {
    if (c.cutoff_rule == "quantile" && !(*c.cutoff_value > 0.0 && *c.cutoff_value <= 1.0))
      config_fail("cutoff.value", "quantile must lie in (0, 1]");
    if (c.cutoff_rule != "quantile" && !(*c.cutoff_value >= 1.0)) config_fail("cutoff.value", "multiplier must be >= 1");
  }
  if (c.directions != "max" && c.directions != "mean" && c.directions != "x" && c.directions != "y")
    config_fail("directions", "expected max, mean, x or y");
  if (c.density_nodes != 0) {
    if (c.density_nodes < 4) config_fail("density.nodes", "must be at least 4");
    if (!(c.density_radius > 1.0)) config_fail("density.radius", "must exceed 1");
  }
  if (c.threads < 1) config_fail("threads", "must be at least 1");
}

fs::path resolve(const RunConfig& c, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : c.base / path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': malformed JSON: " + e.what());
  }
  return parse_config(doc, fs::path(path).parent_path());
}

json echo(const RunConfig& c, double h_target) {
  json j;
  if (c.scenario_inline) j["scenario"] = *c.scenario_inline;
  else if (!c.scenario_path.empty()) j["scenario"] = c.scenario_path;
  j["mesh"] = {{"h_target", h_target}};
  j["N"] = c.order;
  j["noise"] = {{"level", c.noise_level}, {"seed", c.noise_seed}};
  j["grid"] = {{"spacing", c.spacing}, {"r_max", c.r_max}};
  j["delta_rule"] = {{"epsilon", c.epsilon}};
  j["directions"] = c.directions;
  if (c.density_nodes > 0) j["density"] = {{"radius", c.density_radius}, {"nodes", c.density_nodes}};
  j["threads"] = c.threads;
  return j;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << '\n';
  if (!out) throw LibraryError(LSM_ERR_IO, "cannot write '" + path.string() + "'");
}

json mesh_record(const Mesh& mesh) {
  size_t v = 0, t = 0, b = 0;
  double h = 0.0;
  check(lsm_mesh_counts(mesh.get(), &v, &t, &b), "mesh");
  check(lsm_mesh_h_target(mesh.get(), &h), "mesh");
  return {{"kind", "ring"}, {"h_target", h}, {"vertices", v}, {"triangles", t}, {"boundary_vertices", b}};
}

json base_manifest(const char* command) {
  return {{"manifest_format", kManifestFormat}, {"command", command}, {"library_version", lsm_version()},
          {"formats", {{"ndmap", 1}, {"indicator_csv", 1}, {"mask_csv", 1}}}};
}

// ---------------------------------------------------------------------------

int run_simulate(const RunConfig& c) {
  const double h = c.h_target.value_or(0.03);
  const fs::path out(c.out);
  fs::create_directories(out);

  Scenario scenario;
  json scenario_doc;
  if (c.scenario_inline) {
    scenario_doc = *c.scenario_inline;
  } else if (!c.scenario_path.empty()) {
    try {
      scenario_doc = json::parse(read_file(resolve(c, c.scenario_path)));
    } catch (const json::parse_error& e) {
      throw ConfigError("scenario '" + c.scenario_path + "': malformed JSON: " + e.what());
    }
  } else {
    throw ConfigError("config field 'scenario': missing (simulate needs a scenario)");
  }
  check(lsm_scenario_parse(scenario_doc.dump().c_str(), scenario.out()), "scenario");

  Mesh mesh;
  check(lsm_mesh_build(h, mesh.out()), "mesh");

  int coercive = 0, absorbing = 0, empty_region = 0;
  double alpha = 0.0, zr = 0.0, zi = 0.0, beta = 0.0;
  check(lsm_scenario_check_coercivity(scenario.get(), mesh.get(), &coercive, &alpha, &zr, &zi), "coercivity");
  check(lsm_scenario_check_absorption(scenario.get(), mesh.get(), &absorbing, &beta, &empty_region), "absorption");

  NdMap measured, background;
  check(lsm_ndmap_compute(mesh.get(), scenario.get(), c.order, c.threads, measured.out()), "forward");
  check(lsm_ndmap_background(mesh.get(), c.order, c.threads, background.out()), "background");
  NdMap noisy;
  const lsm_ndmap* final_map = measured.get();
  if (c.noise_level > 0.0) {
    check(lsm_ndmap_add_noise(measured.get(), c.noise_level, c.noise_seed, noisy.out()), "noise");
    final_map = noisy.get();
  }
  check(lsm_ndmap_save(final_map, (out / "measured.ndmap").string().c_str()), "write");
  check(lsm_ndmap_save(background.get(), (out / "background.ndmap").string().c_str()), "write");

  double defect = 0.0;
  check(lsm_ndmap_reciprocity_defect(final_map, &defect), "reciprocity");

  json m = base_manifest("simulate");
  m["config"] = echo(c, h);
  m["scenario"] = scenario_doc;
  m["mesh"] = mesh_record(mesh);
  m["N"] = c.order;
  m["noise"] = {{"level", c.noise_level}, {"seed", c.noise_seed}};
  m["checks"] = {{"coercivity", {{"holds", coercive != 0}, {"alpha", alpha}, {"z", {zr, zi}}}},
                 {"absorption", {{"holds", absorbing != 0}, {"beta", beta}, {"empty_region", empty_region != 0}}},
                 {"reciprocity_defect", defect}};
  m["outputs"] = {{"measured", {{"file", "measured.ndmap"}, {"provenance", lsm_ndmap_provenance(final_map)}}},
                  {"background", {{"file", "background.ndmap"}, {"provenance", lsm_ndmap_provenance(background.get())}}}};
  write_json(out / "manifest.json", m);

  std::cout << "simulate: wrote " << (out / "measured.ndmap").string() << " and background.ndmap (N = " << c.order
            << ", " << lsm_ndmap_provenance(final_map) << ")\n";
  return kExitOk;
}

lsm_directions direction_code(const std::string& s) {
  if (s == "mean") return LSM_DIRECTIONS_MEAN;
  if (s == "x") return LSM_DIRECTIONS_X;
  if (s == "y") return LSM_DIRECTIONS_Y;
  return LSM_DIRECTIONS_MAX;
}

int run_reconstruct(const RunConfig& c) {
  const double h = c.h_target.value_or(0.03);
  const fs::path out(c.out);
  fs::create_directories(out);
  const fs::path measured_path = c.measured_path.empty() ? out / "measured.ndmap" : resolve(c, c.measured_path);
  const fs::path background_path =
      c.background_path.empty() ? out / "background.ndmap" : resolve(c, c.background_path);

  NdMap measured, background;
  check(lsm_ndmap_load(measured_path.string().c_str(), measured.out()), "measured map");
  check(lsm_ndmap_load(background_path.string().c_str(), background.out()), "background map");
  Relative data;
  check(lsm_relative_data_create(measured.get(), background.get(), data.out()), "relative data");
  Mesh mesh;
  check(lsm_mesh_build(h, mesh.out()), "mesh");

  lsm_sweep_options opts;
  lsm_sweep_options_default(&opts);
  opts.spacing = c.spacing;
  opts.r_max = c.r_max;
  opts.epsilon = c.epsilon;
  opts.directions = direction_code(c.directions);
  opts.threads = c.threads;
  opts.density_nodes = c.density_nodes;
  opts.density_radius = c.density_radius;

  Indicator map;
  check(lsm_indicator_map_compute(data.get(), mesh.get(), &opts, map.out()), "sweep");
  check(lsm_indicator_map_write_csv(map.get(), (out / "indicator.csv").string().c_str()), "write");
  check(lsm_indicator_map_write_pgm(map.get(), (out / "indicator.pgm").string().c_str()), "write");

  size_t total = 0, feasible = 0;
  check(lsm_indicator_map_size(map.get(), &total), "sweep");
  check(lsm_indicator_map_feasible_count(map.get(), &feasible), "sweep");

  lsm_support_rule rule;
  lsm_support_rule_default(&rule);
  if (c.cutoff_rule == "quantile") {
    rule.kind = LSM_RULE_QUANTILE;
    rule.value = 0.1;
  } else if (c.cutoff_rule == "alpha") {
    rule.kind = LSM_RULE_ALPHA_MULTIPLIER;
  }
  if (c.cutoff_value) rule.value = *c.cutoff_value;

  json m = base_manifest("reconstruct");
  m["config"] = echo(c, h);
  m["config"]["cutoff"] = {{"rule", c.cutoff_rule}, {"value", rule.value}};
  m["inputs"] = {{"measured", {{"file", measured_path.generic_string()}, {"provenance", lsm_ndmap_provenance(measured.get())}}},
                 {"background", {{"file", background_path.generic_string()}, {"provenance", lsm_ndmap_provenance(background.get())}}}};
  m["mesh"] = mesh_record(mesh);
  m["sweep"] = {{"points", total}, {"feasible", feasible}};

  if (feasible == 0) {
    m["outputs"] = {"indicator.csv", "indicator.pgm"};
    m["error"] = "every grid point is infeasible";
    write_json(out / "manifest.json", m);
    std::cerr << "reconstruct: every one of the " << total << " grid points is infeasible; no support estimate\n";
    return kExitFailure;
  }

  Mask mask;
  check(lsm_mask_estimate(map.get(), &rule, mask.out()), "support");
  check(lsm_mask_write_csv(mask.get(), (out / "mask.csv").string().c_str()), "write");
  size_t inside = 0;
  double threshold = 0.0;
  check(lsm_mask_count(mask.get(), &inside), "support");
  check(lsm_mask_threshold(mask.get(), &threshold), "support");
  m["support"] = {{"inside", inside}, {"threshold", threshold}};
  m["outputs"] = {"indicator.csv", "indicator.pgm", "mask.csv"};
  write_json(out / "manifest.json", m);

  std::cout << "reconstruct: " << feasible << "/" << total << " feasible points, " << inside
            << " marked inside; outputs in " << out.string() << "\n";
  return kExitOk;
}

int run_verify(const RunConfig& c, bool write_outputs) {
  const double h = c.h_target.value_or(0.02);
  Report report;
  check(lsm_verify_run(h, c.order, c.threads, report.out()), "verify");
  size_t n = 0;
  int all = 0;
  check(lsm_verify_report_count(report.get(), &n), "verify");
  check(lsm_verify_report_all_passed(report.get(), &all), "verify");
  json checks = json::array();
  for (size_t i = 0; i < n; ++i) {
    lsm_check chk;
    check(lsm_verify_report_check(report.get(), i, &chk), "verify");
    char line[256];
    std::snprintf(line, sizeof line, "%s %-24s achieved=%.3e required<=%.3e", chk.passed ? "PASS" : "FAIL", chk.name,
                  chk.achieved, chk.required);
    std::cout << line;
    if (chk.detail[0] != '\0') std::cout << " (" << chk.detail << ")";
    std::cout << '\n';
    checks.push_back({{"name", chk.name},
                      {"achieved", std::isfinite(chk.achieved) ? json(chk.achieved) : json(nullptr)},
                      {"required", chk.required},
                      {"passed", chk.passed != 0},
                      {"detail", chk.detail}});
  }
  std::cout << (all ? "verify: all checks passed\n" : "verify: FAILED\n");
  if (write_outputs) {
    const fs::path out(c.out);
    fs::create_directories(out);
    json m = base_manifest("verify");
    m["config"] = {{"mesh", {{"h_target", h}}}, {"N", c.order}, {"threads", c.threads}};
    m["checks"] = checks;
    m["passed"] = all != 0;
    write_json(out / "manifest.json", m);
  }
  return all ? kExitOk : kExitFailure;
}

int exit_code_for(lsm_status s) {
  switch (s) {
    case LSM_ERR_ESTIMATION:
    case LSM_ERR_SOLVER:
    case LSM_ERR_INTERNAL:
      return kExitFailure;
    default:
      return kExitConfig;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear sampling reconstruction for the unit disk"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration document (JSON)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  };
  CLI::App* simulate = app.add_subcommand("simulate", "compute measured and background ND maps");
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "indicator sweep and support estimate");
  CLI::App* verify = app.add_subcommand("verify", "run the analytic oracle checks");
  add_common(simulate);
  add_common(reconstruct);
  add_common(verify);
  simulate->add_option("--seed", seed, "noise seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (seed) cfg.noise_seed = *seed;
    validate(cfg);
    if (simulate->parsed()) return run_simulate(cfg);
    if (reconstruct->parsed()) return run_reconstruct(cfg);
    return run_verify(cfg, !out_dir.empty());
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LibraryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
