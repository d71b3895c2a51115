#include "lsm/lsm.h"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <new>
#include <string>

#include "lsm/error.hpp"
#include "lsm/forward.hpp"
#include "lsm/geometry.hpp"
#include "lsm/media.hpp"
#include "lsm/sampling.hpp"
#include "lsm/verify.hpp"

struct lsm_mesh {
  lsm::DiskMesh mesh;
};
struct lsm_scenario {
  lsm::AdmittanceField field;
};
struct lsm_ndmap {
  lsm::NdMap map;
  std::string provenance;
};
struct lsm_relative_data {
  lsm::RelativeData data;
};
struct lsm_indicator_map {
  lsm::IndicatorMap map;
};
struct lsm_mask {
  lsm::SupportMask mask;
};
struct lsm_verify_report {
  lsm::VerifyReport report;
};

namespace {

thread_local std::string last_error;

lsm_status record(lsm_status status, const char* message) {
  last_error = message;
  return status;
}

template <class F>
lsm_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return LSM_OK;
  } catch (const lsm::Error& e) {
    return record(static_cast<lsm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(LSM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(LSM_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(LSM_ERR_INTERNAL, "unknown exception");
  }
}

lsm_status succeed() {
  last_error.clear();
  return LSM_OK;
}

#define LSM_REQUIRE(ptr)                                                             \
  do {                                                                               \
    if (!(ptr)) return record(LSM_ERR_INVALID_ARGUMENT, #ptr " must not be null");   \
  } while (0)

// Handle outputs are cleared first so a failed call never leaves a stale value.
#define LSM_REQUIRE_OUT(ptr) \
  do {                       \
    LSM_REQUIRE(ptr);        \
    *(ptr) = nullptr;        \
  } while (0)

std::ofstream open_out(const char* path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) lsm::fail(lsm::ErrorCode::Io, std::string("cannot open '") + path + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const char* path) {
  out.close();
  if (!out) lsm::fail(lsm::ErrorCode::Io, std::string("write to '") + path + "' failed");
}

lsm_ndmap* wrap(lsm::NdMap map) {
  auto* h = new lsm_ndmap{std::move(map), {}};
  h->provenance = h->map.provenance.tag();
  return h;
}

} // namespace

extern "C" {

const char* lsm_last_error(void) { return last_error.c_str(); }

const char* lsm_status_name(lsm_status status) {
  switch (status) {
    case LSM_OK: return "ok";
    case LSM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LSM_ERR_CONFIGURATION: return "configuration error";
    case LSM_ERR_DOMAIN: return "domain error";
    case LSM_ERR_ALIASING: return "aliasing error";
    case LSM_ERR_COERCIVITY: return "coercivity refusal";
    case LSM_ERR_SOLVER: return "solver failure";
    case LSM_ERR_SINGULARITY: return "singularity";
    case LSM_ERR_ACCURACY: return "accuracy error";
    case LSM_ERR_DIMENSION: return "dimension mismatch";
    case LSM_ERR_ESTIMATION: return "estimation error";
    case LSM_ERR_IO: return "i/o error";
    case LSM_ERR_PARSE: return "parse error";
    case LSM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lsm_version(void) { return "1.0.0"; }

// ---------------------------------------------------------------------------

lsm_status lsm_mesh_build(double h_target, lsm_mesh** out) {
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = new lsm_mesh{lsm::build_disk_mesh(h_target)}; });
}

lsm_status lsm_mesh_load(const char* path, lsm_mesh** out) {
  LSM_REQUIRE(path);
  LSM_REQUIRE_OUT(out);
  return guarded([&] {
    std::ifstream in(path);
    if (!in) lsm::fail(lsm::ErrorCode::Io, std::string("cannot open '") + path + "'");
    lsm::DiskMesh mesh = lsm::read_mesh(in);
    lsm::validate_mesh(mesh);
    *out = new lsm_mesh{std::move(mesh)};
  });
}

lsm_status lsm_mesh_save(const lsm_mesh* mesh, const char* path) {
  LSM_REQUIRE(mesh);
  LSM_REQUIRE(path);
  return guarded([&] {
    std::ofstream out = open_out(path);
    lsm::write_mesh(out, mesh->mesh);
    close_out(out, path);
  });
}

lsm_status lsm_mesh_counts(const lsm_mesh* mesh, size_t* vertices, size_t* triangles, size_t* boundary) {
  LSM_REQUIRE(mesh);
  if (vertices) *vertices = mesh->mesh.vertices.size();
  if (triangles) *triangles = mesh->mesh.triangles.size();
  if (boundary) *boundary = mesh->mesh.boundary.size();
  return succeed();
}

lsm_status lsm_mesh_h_target(const lsm_mesh* mesh, double* h_target) {
  LSM_REQUIRE(mesh);
  LSM_REQUIRE(h_target);
  *h_target = mesh->mesh.h_target;
  return succeed();
}

void lsm_mesh_free(lsm_mesh* mesh) { delete mesh; }

// ---------------------------------------------------------------------------

lsm_status lsm_scenario_parse(const char* json_text, lsm_scenario** out) {
  LSM_REQUIRE(json_text);
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = new lsm_scenario{lsm::parse_scenario(json_text)}; });
}

lsm_status lsm_scenario_load(const char* path, lsm_scenario** out) {
  LSM_REQUIRE(path);
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = new lsm_scenario{lsm::load_scenario(path)}; });
}

lsm_status lsm_scenario_background(lsm_scenario** out) {
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = new lsm_scenario{lsm::AdmittanceField::background()}; });
}

lsm_status lsm_scenario_component_count(const lsm_scenario* scenario, size_t* count) {
  LSM_REQUIRE(scenario);
  LSM_REQUIRE(count);
  *count = scenario->field.components().size();
  return succeed();
}

lsm_status lsm_scenario_contains(const lsm_scenario* scenario, double x, double y, int* inside) {
  LSM_REQUIRE(scenario);
  LSM_REQUIRE(inside);
  return guarded([&] { *inside = scenario->field.in_inclusion(lsm::Point(x, y)) ? 1 : 0; });
}

lsm_status lsm_scenario_check_coercivity(const lsm_scenario* scenario, const lsm_mesh* mesh, int* holds,
                                         double* alpha, double* z_re, double* z_im) {
  LSM_REQUIRE(scenario);
  LSM_REQUIRE(mesh);
  return guarded([&] {
    const std::vector<lsm::Point> pts = mesh->mesh.centroids();
    const lsm::CoercivityVerdict v = lsm::check_coercivity(scenario->field, pts);
    if (holds) *holds = v.holds ? 1 : 0;
    if (alpha) *alpha = v.alpha;
    if (z_re) *z_re = v.z.real();
    if (z_im) *z_im = v.z.imag();
  });
}

lsm_status lsm_scenario_check_absorption(const lsm_scenario* scenario, const lsm_mesh* mesh, int* holds,
                                         double* beta, int* empty_region) {
  LSM_REQUIRE(scenario);
  LSM_REQUIRE(mesh);
  return guarded([&] {
    const std::vector<lsm::Point> pts = mesh->mesh.centroids();
    const lsm::AbsorptionVerdict v = lsm::check_absorption(scenario->field, pts);
    if (holds) *holds = v.holds ? 1 : 0;
    if (beta) *beta = v.beta;
    if (empty_region) *empty_region = v.empty_region ? 1 : 0;
  });
}

void lsm_scenario_free(lsm_scenario* scenario) { delete scenario; }

// ---------------------------------------------------------------------------

lsm_status lsm_ndmap_compute(const lsm_mesh* mesh, const lsm_scenario* scenario, int order, int threads,
                             lsm_ndmap** out) {
  LSM_REQUIRE(mesh);
  LSM_REQUIRE(scenario);
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = wrap(lsm::compute_nd_map(mesh->mesh, scenario->field, order, threads)); });
}

lsm_status lsm_ndmap_background(const lsm_mesh* mesh, int order, int threads, lsm_ndmap** out) {
  LSM_REQUIRE(mesh);
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = wrap(lsm::compute_background_nd_map(mesh->mesh, order, threads)); });
}

lsm_status lsm_ndmap_analytic_background(int order, lsm_ndmap** out) {
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = wrap(lsm::analytic_background_nd_map(order)); });
}

lsm_status lsm_ndmap_add_noise(const lsm_ndmap* map, double level, uint64_t seed, lsm_ndmap** out) {
  LSM_REQUIRE(map);
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = wrap(lsm::add_noise(map->map, level, seed)); });
}

lsm_status lsm_ndmap_load(const char* path, lsm_ndmap** out) {
  LSM_REQUIRE(path);
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = wrap(lsm::load_ndmap(path)); });
}

lsm_status lsm_ndmap_save(const lsm_ndmap* map, const char* path) {
  LSM_REQUIRE(map);
  LSM_REQUIRE(path);
  return guarded([&] { lsm::save_ndmap(path, map->map); });
}

lsm_status lsm_ndmap_order(const lsm_ndmap* map, int* order) {
  LSM_REQUIRE(map);
  LSM_REQUIRE(order);
  *order = map->map.order;
  return succeed();
}

lsm_status lsm_ndmap_entry(const lsm_ndmap* map, int m, int n, double* re, double* im) {
  LSM_REQUIRE(map);
  const int order = map->map.order;
  if (m == 0 || n == 0 || std::abs(m) > order || std::abs(n) > order)
    return record(LSM_ERR_INVALID_ARGUMENT, "mode index out of range");
  const lsm::cplx v = map->map(m, n);
  if (re) *re = v.real();
  if (im) *im = v.imag();
  return succeed();
}

lsm_status lsm_ndmap_reciprocity_defect(const lsm_ndmap* map, double* defect) {
  LSM_REQUIRE(map);
  LSM_REQUIRE(defect);
  return guarded([&] { *defect = lsm::reciprocity_defect(map->map); });
}

const char* lsm_ndmap_provenance(const lsm_ndmap* map) { return map ? map->provenance.c_str() : ""; }

void lsm_ndmap_free(lsm_ndmap* map) { delete map; }

// ---------------------------------------------------------------------------

lsm_status lsm_relative_data_create(const lsm_ndmap* measured, const lsm_ndmap* background,
                                    lsm_relative_data** out) {
  LSM_REQUIRE(measured);
  LSM_REQUIRE(background);
  LSM_REQUIRE_OUT(out);
  return guarded([&] { *out = new lsm_relative_data{lsm::RelativeData(measured->map, background->map)}; });
}

lsm_status lsm_relative_data_singular_values(const lsm_relative_data* data, double* values, size_t capacity,
                                             size_t* count) {
  LSM_REQUIRE(data);
  const Eigen::VectorXd& s = data->data.singular_values();
  if (count) *count = static_cast<size_t>(s.size());
  if (values)
    for (size_t i = 0; i < capacity && i < static_cast<size_t>(s.size()); ++i) values[i] = s[static_cast<Eigen::Index>(i)];
  return succeed();
}

void lsm_relative_data_free(lsm_relative_data* data) { delete data; }

// ---------------------------------------------------------------------------

void lsm_sweep_options_default(lsm_sweep_options* options) {
  if (!options) return;
  const lsm::SweepOptions d;
  options->spacing = d.grid.spacing;
  options->r_max = d.grid.r_max;
  options->epsilon = d.epsilon;
  options->directions = LSM_DIRECTIONS_MAX;
  options->threads = d.threads;
  options->density_nodes = 0;
  options->density_radius = 2.0;
}

lsm_status lsm_indicator_map_compute(const lsm_relative_data* data, const lsm_mesh* mesh,
                                     const lsm_sweep_options* options, lsm_indicator_map** out) {
  LSM_REQUIRE(data);
  LSM_REQUIRE(mesh);
  LSM_REQUIRE(options);
  LSM_REQUIRE_OUT(out);
  return guarded([&] {
    lsm::SweepOptions o;
    o.grid.spacing = options->spacing;
    o.grid.r_max = options->r_max;
    o.epsilon = options->epsilon;
    switch (options->directions) {
      case LSM_DIRECTIONS_MAX: o.directions = lsm::DirectionStrategy::Max; break;
      case LSM_DIRECTIONS_MEAN: o.directions = lsm::DirectionStrategy::Mean; break;
      case LSM_DIRECTIONS_X: o.directions = lsm::DirectionStrategy::X; break;
      case LSM_DIRECTIONS_Y: o.directions = lsm::DirectionStrategy::Y; break;
      default: lsm::fail(lsm::ErrorCode::InvalidArgument, "unknown direction strategy");
    }
    o.threads = options->threads;
    if (options->density_nodes > 0) o.density = lsm::AuxCircle(options->density_radius, options->density_nodes);
    *out = new lsm_indicator_map{lsm::indicator_map(data->data, mesh->mesh, o)};
  });
}

lsm_status lsm_indicator_map_size(const lsm_indicator_map* map, size_t* size) {
  LSM_REQUIRE(map);
  LSM_REQUIRE(size);
  *size = map->map.points.size();
  return succeed();
}

lsm_status lsm_indicator_map_feasible_count(const lsm_indicator_map* map, size_t* count) {
  LSM_REQUIRE(map);
  LSM_REQUIRE(count);
  *count = 0;
  for (const lsm::IndicatorPoint& p : map->map.points) *count += p.feasible ? 1 : 0;
  return succeed();
}

lsm_status lsm_indicator_map_point(const lsm_indicator_map* map, size_t index, lsm_indicator_point* out) {
  LSM_REQUIRE(map);
  LSM_REQUIRE(out);
  if (index >= map->map.points.size()) return record(LSM_ERR_INVALID_ARGUMENT, "point index out of range");
  const lsm::IndicatorPoint& p = map->map.points[index];
  out->x = p.y.x();
  out->y = p.y.y();
  out->indicator = p.indicator;
  out->alpha = p.alpha;
  out->feasible = p.feasible ? 1 : 0;
  out->density_indicator = p.density_indicator;
  return succeed();
}

lsm_status lsm_indicator_map_write_csv(const lsm_indicator_map* map, const char* path) {
  LSM_REQUIRE(map);
  LSM_REQUIRE(path);
  return guarded([&] {
    std::ofstream out = open_out(path);
    lsm::write_indicator_csv(out, map->map);
    close_out(out, path);
  });
}

lsm_status lsm_indicator_map_write_pgm(const lsm_indicator_map* map, const char* path) {
  LSM_REQUIRE(map);
  LSM_REQUIRE(path);
  return guarded([&] {
    std::ofstream out = open_out(path);
    lsm::write_indicator_pgm(out, map->map);
    close_out(out, path);
  });
}

void lsm_indicator_map_free(lsm_indicator_map* map) { delete map; }

// ---------------------------------------------------------------------------

void lsm_support_rule_default(lsm_support_rule* rule) {
  if (!rule) return;
  const lsm::SupportRule d;
  rule->kind = LSM_RULE_MULTIPLIER;
  rule->value = d.value;
}

lsm_status lsm_mask_estimate(const lsm_indicator_map* map, const lsm_support_rule* rule, lsm_mask** out) {
  LSM_REQUIRE(map);
  LSM_REQUIRE_OUT(out);
  return guarded([&] {
    lsm::SupportRule r;
    if (rule) {
      switch (rule->kind) {
        case LSM_RULE_MULTIPLIER: r.kind = lsm::SupportRule::Kind::Multiplier; break;
        case LSM_RULE_QUANTILE: r.kind = lsm::SupportRule::Kind::Quantile; break;
        case LSM_RULE_ALPHA_MULTIPLIER: r.kind = lsm::SupportRule::Kind::AlphaMultiplier; break;
        default: lsm::fail(lsm::ErrorCode::InvalidArgument, "unknown support rule");
      }
      r.value = rule->value;
    }
    *out = new lsm_mask{lsm::estimate_support(map->map, r)};
  });
}

lsm_status lsm_mask_size(const lsm_mask* mask, size_t* size) {
  LSM_REQUIRE(mask);
  LSM_REQUIRE(size);
  *size = mask->mask.inside.size();
  return succeed();
}

lsm_status lsm_mask_count(const lsm_mask* mask, size_t* count) {
  LSM_REQUIRE(mask);
  LSM_REQUIRE(count);
  *count = mask->mask.count();
  return succeed();
}

lsm_status lsm_mask_threshold(const lsm_mask* mask, double* threshold) {
  LSM_REQUIRE(mask);
  LSM_REQUIRE(threshold);
  *threshold = mask->mask.threshold;
  return succeed();
}

lsm_status lsm_mask_inside(const lsm_mask* mask, size_t index, int* inside) {
  LSM_REQUIRE(mask);
  LSM_REQUIRE(inside);
  if (index >= mask->mask.inside.size()) return record(LSM_ERR_INVALID_ARGUMENT, "mask index out of range");
  *inside = mask->mask.inside[index] ? 1 : 0;
  return succeed();
}

lsm_status lsm_mask_write_csv(const lsm_mask* mask, const char* path) {
  LSM_REQUIRE(mask);
  LSM_REQUIRE(path);
  return guarded([&] {
    std::ofstream out = open_out(path);
    lsm::write_mask_csv(out, mask->mask);
    close_out(out, path);
  });
}

void lsm_mask_free(lsm_mask* mask) { delete mask; }

// ---------------------------------------------------------------------------

lsm_status lsm_verify_run(double h_target, int order, int threads, lsm_verify_report** out) {
  LSM_REQUIRE_OUT(out);
  return guarded([&] {
    lsm::VerifyConfig cfg;
    cfg.h_target = h_target;
    cfg.order = order;
    cfg.threads = threads;
    *out = new lsm_verify_report{lsm::run_verification(cfg)};
  });
}

lsm_status lsm_verify_report_count(const lsm_verify_report* report, size_t* count) {
  LSM_REQUIRE(report);
  LSM_REQUIRE(count);
  *count = report->report.checks.size();
  return succeed();
}

lsm_status lsm_verify_report_check(const lsm_verify_report* report, size_t index, lsm_check* out) {
  LSM_REQUIRE(report);
  LSM_REQUIRE(out);
  if (index >= report->report.checks.size()) return record(LSM_ERR_INVALID_ARGUMENT, "check index out of range");
  const lsm::CheckResult& c = report->report.checks[index];
  out->name = c.name.c_str();
  out->achieved = c.achieved;
  out->required = c.required;
  out->passed = c.passed ? 1 : 0;
  out->detail = c.detail.c_str();
  return succeed();
}

lsm_status lsm_verify_report_all_passed(const lsm_verify_report* report, int* passed) {
  LSM_REQUIRE(report);
  LSM_REQUIRE(passed);
  *passed = report->report.all_passed() ? 1 : 0;
  return succeed();
}

void lsm_verify_report_free(lsm_verify_report* report) { delete report; }

} // extern "C"
