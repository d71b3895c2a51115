#include "lsm/media.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lsm/error.hpp"

namespace lsm {

namespace {

constexpr int kOutlineSamples = 2048;
constexpr double kSymmetryTol = 1e-12;

bool is_symmetric(const Matrix2c& m) { return std::abs(m(0, 1) - m(1, 0)) <= kSymmetryTol * (1.0 + m.norm()); }

} // namespace

Shape Shape::disk(Point center, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::Configuration, "disk radius must be positive");
  return Shape{Kind::Disk, center, radius, radius, 0.0};
}

Shape Shape::ellipse(Point center, double a, double b, double tilt) {
  if (!(a > 0.0 && b > 0.0)) fail(ErrorCode::Configuration, "ellipse semi-axes must be positive");
  return Shape{Kind::Ellipse, center, a, b, tilt};
}

bool Shape::contains(const Point& x) const {
  const Point d = x - center;
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  const double u = (c * d.x() + s * d.y()) / semi_major;
  const double v = (-s * d.x() + c * d.y()) / semi_minor;
  return u * u + v * v < 1.0;
}

std::vector<Point> Shape::outline(int count) const {
  std::vector<Point> pts;
  pts.reserve(count);
  const double c = std::cos(tilt);
  const double s = std::sin(tilt);
  for (int k = 0; k < count; ++k) {
    const double t = 2.0 * kPi * k / count;
    const double u = semi_major * std::cos(t);
    const double v = semi_minor * std::sin(t);
    pts.emplace_back(center.x() + c * u - s * v, center.y() + s * u + c * v);
  }
  return pts;
}

double Shape::max_radius() const {
  if (kind == Kind::Disk) return center.norm() + semi_major;
  double r = 0.0;
  for (const Point& p : outline(kOutlineSamples)) r = std::max(r, p.norm());
  return r;
}

namespace {

bool closures_intersect(const Shape& a, const Shape& b) {
  if (a.kind == Shape::Kind::Disk && b.kind == Shape::Kind::Disk) {
    return (a.center - b.center).norm() <= a.semi_major + b.semi_major;
  }
  if (a.contains(b.center) || b.contains(a.center)) return true;
  // Sampled outline test, padded by the sampling chord length.
  auto near_or_inside = [](const Shape& outer, const Shape& inner) {
    const double pad = 2.0 * kPi * outer.semi_major / kOutlineSamples;
    const Shape grown = Shape::ellipse(outer.center, outer.semi_major + pad, outer.semi_minor + pad, outer.tilt);
    for (const Point& p : inner.outline(kOutlineSamples)) {
      if (grown.contains(p)) return true;
    }
    return false;
  };
  return near_or_inside(a, b) || near_or_inside(b, a);
}

} // namespace

AdmittanceField::AdmittanceField(std::vector<InclusionComponent> components, std::vector<Shape> absorption_region)
    : components_(std::move(components)), absorption_(std::move(absorption_region)) {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (!components_[i].h) fail(ErrorCode::Configuration, "inclusion " + std::to_string(i) + ": missing perturbation");
    if (!(components_[i].shape.max_radius() < 1.0)) {
      fail(ErrorCode::Configuration, "inclusion " + std::to_string(i) + ": closure must lie strictly inside the unit disk");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (closures_intersect(components_[i].shape, components_[j].shape)) {
        fail(ErrorCode::Configuration,
             "inclusions " + std::to_string(j) + " and " + std::to_string(i) + " have intersecting closures");
      }
    }
  }
}

Perturbation AdmittanceField::constant(const Matrix2c& h) {
  if (!is_symmetric(h)) fail(ErrorCode::Configuration, "perturbation matrix must be symmetric");
  return [h](const Point&) { return h; };
}

int AdmittanceField::component_at(const Point& x) const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].shape.contains(x)) return static_cast<int>(i);
  }
  return -1;
}

bool AdmittanceField::in_absorption_region(const Point& x) const {
  if (!in_inclusion(x)) return false;
  if (absorption_.empty()) return true;
  return std::any_of(absorption_.begin(), absorption_.end(), [&](const Shape& s) { return s.contains(x); });
}

Matrix2c AdmittanceField::perturbation(const Point& x) const {
  if (x.norm() > 1.0 + 1e-12) fail(ErrorCode::Domain, "admittance evaluated outside the unit disk");
  const int c = component_at(x);
  if (c < 0) return Matrix2c::Zero();
  Matrix2c h = components_[c].h(x);
  if (!is_symmetric(h)) fail(ErrorCode::Configuration, "perturbation is not symmetric at a sampled point");
  return h;
}

double AdmittanceField::clearance() const {
  double r = 0.0;
  for (const auto& c : components_) r = std::max(r, c.shape.max_radius());
  return 1.0 - r;
}

Matrix2c evaluate_admittance(const AdmittanceField& field, const Point& x) {
  return Matrix2c::Identity() + field.perturbation(x);
}

Eigen::Vector2d hermitian_eigenvalues(const Matrix2c& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double mean = 0.5 * (a + d);
  const double half = 0.5 * (a - d);
  const double rad = std::sqrt(half * half + std::norm(m(0, 1)));
  return {mean - rad, mean + rad};
}

double coercivity_margin(const AdmittanceField& field, std::span<const Point> points, cplx z) {
  // gamma = I outside D contributes Re(z).
  double margin = z.real();
  for (const Point& x : points) {
    if (!field.in_inclusion(x)) continue;
    const Matrix2c zg = z * evaluate_admittance(field, x);
    const Matrix2c herm = 0.5 * (zg + zg.adjoint());
    margin = std::min(margin, hermitian_eigenvalues(herm)[0]);
  }
  return margin;
}

CoercivityVerdict check_coercivity(const AdmittanceField& field, std::span<const Point> points, int z_grid_size) {
  if (z_grid_size < 8) fail(ErrorCode::InvalidArgument, "check_coercivity: z grid needs at least 8 points");
  CoercivityVerdict best;
  best.alpha = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < z_grid_size; ++k) {
    const cplx z = k == 0 ? cplx(1.0, 0.0) : std::polar(1.0, 2.0 * kPi * k / z_grid_size);
    const double a = coercivity_margin(field, points, z);
    if (a > best.alpha) {
      best.alpha = a;
      best.z = z;
    }
  }
  best.holds = best.alpha > 0.0;
  return best;
}

std::vector<Point> absorption_samples(const AdmittanceField& field, std::span<const Point> points) {
  std::vector<Point> out;
  for (const Point& x : points) {
    if (field.in_absorption_region(x)) out.push_back(x);
  }
  return out;
}

AbsorptionVerdict check_absorption(const AdmittanceField& field, std::span<const Point> points) {
  AbsorptionVerdict v;
  const std::vector<Point> region = absorption_samples(field, points);
  if (region.empty()) {
    v.empty_region = true;
    return v;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const Point& x : region) {
    const Matrix2c h = field.perturbation(x);
    // Im(conj(zeta) . h zeta) is the quadratic form of (h - h^H) / 2i.
    const Matrix2c im_part = (h - h.adjoint()) / cplx(0.0, 2.0);
    worst = std::max(worst, hermitian_eigenvalues(im_part)[1]);
  }
  v.beta = -worst;
  v.holds = v.beta > 0.0;
  return v;
}

// ---------------------------------------------------------------------------
// Scenario parsing

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& field, const std::string& msg) {
  fail(ErrorCode::Parse, "scenario field '" + field + "': " + msg);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      parse_fail(where + "." + it.key(), "unknown key");
    }
  }
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) parse_fail(field, "expected a number");
  return v.get<double>();
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(where + "." + key, "missing");
  return *it;
}

Point as_point(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) parse_fail(field, "expected [x, y]");
  return {as_number(v[0], field + "[0]"), as_number(v[1], field + "[1]")};
}

cplx as_complex(const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {as_number(v[0], field + "[0]"), as_number(v[1], field + "[1]")};
  parse_fail(field, "expected a number or [re, im]");
}

Shape parse_shape(const json& obj, const std::string& where, bool allow_h) {
  if (!obj.is_object()) parse_fail(where, "expected an object");
  const json& kind = require(obj, "shape", where);
  if (!kind.is_string()) parse_fail(where + ".shape", "expected a string");
  const std::string k = kind.get<std::string>();
  try {
    if (k == "disk") {
      if (allow_h) reject_unknown(obj, where, {"shape", "center", "radius", "h"});
      else reject_unknown(obj, where, {"shape", "center", "radius"});
      const Point c = as_point(require(obj, "center", where), where + ".center");
      const double r = as_number(require(obj, "radius", where), where + ".radius");
      if (!(r > 0.0)) parse_fail(where + ".radius", "must be positive");
      return Shape::disk(c, r);
    }
    if (k == "ellipse") {
      if (allow_h) reject_unknown(obj, where, {"shape", "center", "semi_axes", "tilt", "h"});
      else reject_unknown(obj, where, {"shape", "center", "semi_axes", "tilt"});
      const Point c = as_point(require(obj, "center", where), where + ".center");
      const Point ab = as_point(require(obj, "semi_axes", where), where + ".semi_axes");
      const double tilt = obj.contains("tilt") ? as_number(obj["tilt"], where + ".tilt") : 0.0;
      if (!(ab.x() > 0.0 && ab.y() > 0.0)) parse_fail(where + ".semi_axes", "must be positive");
      return Shape::ellipse(c, ab.x(), ab.y(), tilt);
    }
  } catch (const json::exception& e) {
    parse_fail(where, e.what());
  }
  parse_fail(where + ".shape", "unknown shape '" + k + "' (expected disk or ellipse)");
}

Matrix2c parse_h(const json& obj, const std::string& where) {
  if (!obj.is_object()) parse_fail(where, "expected an object with xx, xy, yx, yy");
  reject_unknown(obj, where, {"xx", "xy", "yx", "yy"});
  Matrix2c h;
  h(0, 0) = as_complex(require(obj, "xx", where), where + ".xx");
  h(1, 1) = as_complex(require(obj, "yy", where), where + ".yy");
  const cplx xy = as_complex(require(obj, "xy", where), where + ".xy");
  const cplx yx = obj.contains("yx") ? as_complex(obj["yx"], where + ".yx") : xy;
  if (std::abs(xy - yx) > kSymmetryTol * (1.0 + std::abs(xy))) parse_fail(where + ".yx", "must equal xy (h is symmetric)");
  h(0, 1) = xy;
  h(1, 0) = xy;
  return h;
}

} // namespace

AdmittanceField parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("scenario: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) parse_fail("<root>", "expected an object");
  reject_unknown(doc, "scenario", {"inclusions", "absorption_region", "description"});

  std::vector<InclusionComponent> comps;
  if (doc.contains("inclusions")) {
    const json& list = doc["inclusions"];
    if (!list.is_array()) parse_fail("inclusions", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "inclusions[" + std::to_string(i) + "]";
      Shape s = parse_shape(list[i], where, true);
      Matrix2c h = parse_h(require(list[i], "h", where), where + ".h");
      comps.push_back({s, AdmittanceField::constant(h)});
    }
  }
  std::vector<Shape> region;
  if (doc.contains("absorption_region")) {
    const json& list = doc["absorption_region"];
    if (!list.is_array()) parse_fail("absorption_region", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      region.push_back(parse_shape(list[i], "absorption_region[" + std::to_string(i) + "]", false));
    }
  }
  return AdmittanceField(std::move(comps), std::move(region));
}

AdmittanceField load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

} // namespace lsm
