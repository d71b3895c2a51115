#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lsm/lsm.h"

namespace fs = std::filesystem;

namespace {

const char* kDisk = R"({"inclusions": [{"shape": "disk", "center": [0.3, 0.0], "radius": 0.25,
                        "h": {"xx": 2, "xy": 0, "yy": 2}}]})";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lsm_capi_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(lsm_version()) == "1.0.0");
  CHECK(std::string(lsm_status_name(LSM_OK)) == "ok");
  CHECK(std::string(lsm_status_name(LSM_ERR_ESTIMATION)).size() > 0);
  CHECK(std::string(lsm_status_name(static_cast<lsm_status>(1234))).size() > 0);
}

TEST_CASE("mesh lifecycle and errors") {
  lsm_mesh* mesh = nullptr;
  REQUIRE(lsm_mesh_build(0.1, &mesh) == LSM_OK);
  CHECK(std::string(lsm_last_error()).empty());
  size_t v = 0, t = 0, b = 0;
  REQUIRE(lsm_mesh_counts(mesh, &v, &t, &b) == LSM_OK);
  CHECK(v > b);
  CHECK(t > v);
  double h = 0.0;
  CHECK(lsm_mesh_h_target(mesh, &h) == LSM_OK);
  CHECK(h == 0.1);

  const fs::path path = scratch("mesh.txt");
  REQUIRE(lsm_mesh_save(mesh, path.string().c_str()) == LSM_OK);
  lsm_mesh* back = nullptr;
  REQUIRE(lsm_mesh_load(path.string().c_str(), &back) == LSM_OK);
  size_t v2 = 0, t2 = 0, b2 = 0;
  lsm_mesh_counts(back, &v2, &t2, &b2);
  CHECK(v2 == v);
  CHECK(t2 == t);
  CHECK(b2 == b);
  lsm_mesh_free(back);

  lsm_mesh* bad = reinterpret_cast<lsm_mesh*>(0x1);
  CHECK(lsm_mesh_build(2.0, &bad) == LSM_ERR_CONFIGURATION);
  CHECK(bad == nullptr);
  CHECK(std::string(lsm_last_error()).size() > 0);
  CHECK(lsm_mesh_build(0.1, nullptr) == LSM_ERR_INVALID_ARGUMENT);
  CHECK(lsm_mesh_counts(nullptr, &v, &t, &b) == LSM_ERR_INVALID_ARGUMENT);
  CHECK(lsm_mesh_load("/nonexistent/mesh.txt", &back) == LSM_ERR_IO);
  CHECK(lsm_mesh_save(mesh, "/nonexistent/dir/mesh.txt") == LSM_ERR_IO);

  std::ofstream(scratch("junk.txt")) << "hello";
  CHECK(lsm_mesh_load(scratch("junk.txt").string().c_str(), &back) == LSM_ERR_PARSE);

  // a successful call clears the message
  REQUIRE(lsm_mesh_h_target(mesh, &h) == LSM_OK);
  CHECK(std::string(lsm_last_error()).empty());
  lsm_mesh_free(mesh);
  lsm_mesh_free(nullptr);
}

TEST_CASE("scenario handles") {
  lsm_scenario* s = nullptr;
  REQUIRE(lsm_scenario_parse(kDisk, &s) == LSM_OK);
  size_t n = 0;
  CHECK(lsm_scenario_component_count(s, &n) == LSM_OK);
  CHECK(n == 1);
  int inside = 0;
  CHECK(lsm_scenario_contains(s, 0.3, 0.1, &inside) == LSM_OK);
  CHECK(inside == 1);
  CHECK(lsm_scenario_contains(s, -0.3, 0.1, &inside) == LSM_OK);
  CHECK(inside == 0);
  CHECK(lsm_scenario_contains(s, 1.5, 0.0, &inside) == LSM_OK);
  CHECK(inside == 0);

  lsm_mesh* mesh = nullptr;
  REQUIRE(lsm_mesh_build(0.1, &mesh) == LSM_OK);
  int holds = 0, empty = 0;
  double alpha = 0, zr = 0, zi = 0, beta = 0;
  CHECK(lsm_scenario_check_coercivity(s, mesh, &holds, &alpha, &zr, &zi) == LSM_OK);
  CHECK(holds == 1);
  CHECK(alpha == doctest::Approx(1.0));
  CHECK(lsm_scenario_check_absorption(s, mesh, &holds, &beta, &empty) == LSM_OK);
  CHECK(holds == 0);  // real admittance absorbs nothing
  CHECK(empty == 0);

  lsm_scenario* bg = nullptr;
  REQUIRE(lsm_scenario_background(&bg) == LSM_OK);
  CHECK(lsm_scenario_component_count(bg, &n) == LSM_OK);
  CHECK(n == 0);

  lsm_scenario* bad = nullptr;
  CHECK(lsm_scenario_parse("{ nope", &bad) == LSM_ERR_PARSE);
  CHECK(std::string(lsm_last_error()).find("malformed") != std::string::npos);
  CHECK(lsm_scenario_parse(R"({"inclusions": [{"shape": "disk", "center": [0.8, 0], "radius": 0.5,
      "h": {"xx": 1, "xy": 0, "yy": 1}}]})",
                           &bad) == LSM_ERR_CONFIGURATION);
  CHECK(lsm_scenario_load("/nonexistent.json", &bad) == LSM_ERR_IO);
  CHECK(lsm_scenario_parse(nullptr, &bad) == LSM_ERR_INVALID_ARGUMENT);

  lsm_scenario_free(bg);
  lsm_scenario_free(s);
  lsm_mesh_free(mesh);
}

TEST_CASE("ND maps through the C interface") {
  lsm_mesh* mesh = nullptr;
  lsm_scenario* s = nullptr;
  REQUIRE(lsm_mesh_build(0.05, &mesh) == LSM_OK);
  REQUIRE(lsm_scenario_parse(kDisk, &s) == LSM_OK);
  lsm_ndmap *meas = nullptr, *bg = nullptr, *exact = nullptr;
  REQUIRE(lsm_ndmap_compute(mesh, s, 8, 2, &meas) == LSM_OK);
  REQUIRE(lsm_ndmap_background(mesh, 8, 1, &bg) == LSM_OK);
  REQUIRE(lsm_ndmap_analytic_background(8, &exact) == LSM_OK);
  int order = 0;
  CHECK(lsm_ndmap_order(meas, &order) == LSM_OK);
  CHECK(order == 8);

  double re = 0, im = 0;
  CHECK(lsm_ndmap_entry(exact, 3, 3, &re, &im) == LSM_OK);
  CHECK(re == doctest::Approx(1.0 / 3.0));
  CHECK(im == 0.0);
  CHECK(lsm_ndmap_entry(bg, -2, -2, &re, &im) == LSM_OK);
  CHECK(re == doctest::Approx(0.5).epsilon(0.02));
  CHECK(lsm_ndmap_entry(bg, 0, 1, &re, &im) == LSM_ERR_INVALID_ARGUMENT);
  CHECK(lsm_ndmap_entry(bg, 9, 1, &re, &im) == LSM_ERR_INVALID_ARGUMENT);

  double defect = 1.0;
  CHECK(lsm_ndmap_reciprocity_defect(meas, &defect) == LSM_OK);
  CHECK(defect <= 1e-6);
  CHECK(std::string(lsm_ndmap_provenance(meas)).size() > 0);
  CHECK(std::string(lsm_ndmap_provenance(nullptr)).empty());

  const fs::path path = scratch("map.ndmap");
  REQUIRE(lsm_ndmap_save(meas, path.string().c_str()) == LSM_OK);
  lsm_ndmap* back = nullptr;
  REQUIRE(lsm_ndmap_load(path.string().c_str(), &back) == LSM_OK);
  for (int m = -8; m <= 8; ++m)
    for (int n = -8; n <= 8; ++n) {
      if (m == 0 || n == 0) continue;
      double a = 0, b = 0, c = 0, d = 0;
      lsm_ndmap_entry(meas, m, n, &a, &b);
      lsm_ndmap_entry(back, m, n, &c, &d);
      CHECK(a == c);
      CHECK(b == d);
    }
  CHECK(std::string(lsm_ndmap_provenance(back)) == lsm_ndmap_provenance(meas));

  lsm_ndmap *noisy = nullptr, *noisy2 = nullptr;
  REQUIRE(lsm_ndmap_add_noise(meas, 0.05, 7, &noisy) == LSM_OK);
  REQUIRE(lsm_ndmap_add_noise(meas, 0.05, 7, &noisy2) == LSM_OK);
  double a = 0, b = 0, c = 0, d = 0;
  lsm_ndmap_entry(noisy, 1, 2, &a, &b);
  lsm_ndmap_entry(noisy2, 1, 2, &c, &d);
  CHECK(a == c);
  CHECK(b == d);
  CHECK(std::string(lsm_ndmap_provenance(noisy)).find("noisy") != std::string::npos);
  lsm_ndmap* neg = nullptr;
  CHECK(lsm_ndmap_add_noise(meas, -1.0, 7, &neg) != LSM_OK);

  CHECK(lsm_ndmap_compute(mesh, s, 0, 1, &neg) != LSM_OK);
  CHECK(lsm_ndmap_compute(mesh, s, 500, 1, &neg) == LSM_ERR_ALIASING);

  lsm_relative_data* rel = nullptr;
  REQUIRE(lsm_relative_data_create(meas, bg, &rel) == LSM_OK);
  size_t count = 0;
  std::vector<double> sv(4);
  REQUIRE(lsm_relative_data_singular_values(rel, sv.data(), sv.size(), &count) == LSM_OK);
  CHECK(count == 16);
  CHECK(sv[0] >= sv[1]);
  CHECK(sv[3] > 0.0);
  CHECK(lsm_relative_data_singular_values(rel, nullptr, 0, &count) == LSM_OK);
  lsm_ndmap* small = nullptr;
  REQUIRE(lsm_ndmap_analytic_background(6, &small) == LSM_OK);
  lsm_relative_data* mismatch = nullptr;
  CHECK(lsm_relative_data_create(meas, small, &mismatch) == LSM_ERR_DIMENSION);

  lsm_relative_data_free(rel);
  for (lsm_ndmap* m : {meas, bg, exact, back, noisy, noisy2, small}) lsm_ndmap_free(m);
  lsm_scenario_free(s);
  lsm_mesh_free(mesh);
}

TEST_CASE("sweep, support and outputs") {
  lsm_mesh* mesh = nullptr;
  lsm_scenario* s = nullptr;
  REQUIRE(lsm_mesh_build(0.05, &mesh) == LSM_OK);
  REQUIRE(lsm_scenario_parse(kDisk, &s) == LSM_OK);
  lsm_ndmap *meas = nullptr, *bg = nullptr;
  REQUIRE(lsm_ndmap_compute(mesh, s, 10, 1, &meas) == LSM_OK);
  REQUIRE(lsm_ndmap_background(mesh, 10, 1, &bg) == LSM_OK);
  lsm_relative_data* rel = nullptr;
  REQUIRE(lsm_relative_data_create(meas, bg, &rel) == LSM_OK);

  lsm_sweep_options opt;
  lsm_sweep_options_default(&opt);
  CHECK(opt.spacing == 0.05);
  CHECK(opt.r_max == 0.9);
  CHECK(opt.epsilon == 0.01);
  CHECK(opt.directions == LSM_DIRECTIONS_MAX);
  opt.spacing = 0.15;
  opt.r_max = 0.6;
  lsm_indicator_map* map = nullptr;
  REQUIRE(lsm_indicator_map_compute(rel, mesh, &opt, &map) == LSM_OK);
  size_t size = 0, feasible = 0;
  CHECK(lsm_indicator_map_size(map, &size) == LSM_OK);
  CHECK(lsm_indicator_map_feasible_count(map, &feasible) == LSM_OK);
  CHECK(size == 49);
  CHECK(feasible > 0);
  CHECK(feasible <= size);
  lsm_indicator_point p;
  REQUIRE(lsm_indicator_map_point(map, 0, &p) == LSM_OK);
  CHECK(p.x == doctest::Approx(0.0));
  CHECK(p.y == doctest::Approx(-0.6));
  CHECK(std::isnan(p.density_indicator));
  CHECK(lsm_indicator_map_point(map, size, &p) == LSM_ERR_INVALID_ARGUMENT);

  lsm_support_rule rule;
  lsm_support_rule_default(&rule);
  CHECK(rule.kind == LSM_RULE_MULTIPLIER);
  CHECK(rule.value == 75.0);
  lsm_mask* mask = nullptr;
  REQUIRE(lsm_mask_estimate(map, &rule, &mask) == LSM_OK);
  size_t msize = 0, inside = 0;
  double threshold = 0;
  CHECK(lsm_mask_size(mask, &msize) == LSM_OK);
  CHECK(msize == size);
  CHECK(lsm_mask_count(mask, &inside) == LSM_OK);
  CHECK(inside >= 1);
  CHECK(lsm_mask_threshold(mask, &threshold) == LSM_OK);
  CHECK(threshold > 0.0);
  for (size_t i = 0; i < msize; ++i) {
    int in = 0;
    REQUIRE(lsm_mask_inside(mask, i, &in) == LSM_OK);
    lsm_indicator_map_point(map, i, &p);
    if (in) {
      CHECK(p.feasible == 1);
      CHECK(p.indicator <= threshold);
    }
  }

  const fs::path csv = scratch("indicator.csv"), pgm = scratch("indicator.pgm"), mcsv = scratch("mask.csv");
  REQUIRE(lsm_indicator_map_write_csv(map, csv.string().c_str()) == LSM_OK);
  REQUIRE(lsm_indicator_map_write_pgm(map, pgm.string().c_str()) == LSM_OK);
  REQUIRE(lsm_mask_write_csv(mask, mcsv.string().c_str()) == LSM_OK);
  CHECK(slurp(csv).rfind("x,y,indicator,alpha,feasible\n", 0) == 0);
  CHECK(slurp(pgm).rfind("P5\n9 9\n255\n", 0) == 0);
  CHECK(slurp(mcsv).rfind("x,y,inside\n", 0) == 0);
  CHECK(lsm_indicator_map_write_csv(map, "/nonexistent/dir/x.csv") == LSM_ERR_IO);

  lsm_support_rule bad_rule{LSM_RULE_QUANTILE, 2.0};
  lsm_mask* bad = nullptr;
  CHECK(lsm_mask_estimate(map, &bad_rule, &bad) == LSM_ERR_CONFIGURATION);

  // a discrepancy larger than every right-hand side leaves nothing feasible
  opt.epsilon = 2.0;
  lsm_indicator_map* none = nullptr;
  REQUIRE(lsm_indicator_map_compute(rel, mesh, &opt, &none) == LSM_OK);
  CHECK(lsm_indicator_map_feasible_count(none, &feasible) == LSM_OK);
  CHECK(feasible == 0);
  CHECK(lsm_mask_estimate(none, &rule, &bad) == LSM_ERR_ESTIMATION);

  opt.epsilon = 0.0;
  CHECK(lsm_indicator_map_compute(rel, mesh, &opt, &none) == LSM_ERR_CONFIGURATION);
  CHECK(lsm_indicator_map_compute(rel, mesh, nullptr, &none) == LSM_ERR_INVALID_ARGUMENT);

  lsm_mask_free(mask);
  lsm_indicator_map_free(map);
  lsm_relative_data_free(rel);
  lsm_ndmap_free(meas);
  lsm_ndmap_free(bg);
  lsm_scenario_free(s);
  lsm_mesh_free(mesh);
}

TEST_CASE("verification report through the C interface") {
  lsm_verify_report* r = nullptr;
  REQUIRE(lsm_verify_run(0.3, 16, 1, &r) == LSM_OK);
  size_t n = 0;
  CHECK(lsm_verify_report_count(r, &n) == LSM_OK);
  CHECK(n == 6);
  int all = 1;
  CHECK(lsm_verify_report_all_passed(r, &all) == LSM_OK);
  CHECK(all == 0);
  lsm_check c;
  REQUIRE(lsm_verify_report_check(r, 0, &c) == LSM_OK);
  CHECK(std::string(c.name) == "background_spectrum");
  CHECK(c.passed == 0);
  CHECK(c.achieved > c.required);
  CHECK(lsm_verify_report_check(r, n, &c) == LSM_ERR_INVALID_ARGUMENT);
  lsm_verify_report_free(r);
}
