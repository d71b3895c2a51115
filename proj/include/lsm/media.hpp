#ifndef LSM_MEDIA_HPP
#define LSM_MEDIA_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lsm/geometry.hpp"

namespace lsm {

using Matrix2c = Eigen::Matrix2cd;

// Disk or (tilted) ellipse. A disk is an ellipse with equal semi-axes.
struct Shape {
  enum class Kind { Disk, Ellipse };

  Kind kind = Kind::Disk;
  Point center = Point::Zero();
  double semi_major = 0.0;  // radius for disks
  double semi_minor = 0.0;
  double tilt = 0.0;        // radians, major axis from the x axis

  static Shape disk(Point center, double radius);
  static Shape ellipse(Point center, double a, double b, double tilt);

  // Open set membership.
  bool contains(const Point& x) const;
  // Points on the boundary curve, uniform in the ellipse parameter.
  std::vector<Point> outline(int count) const;
  double max_radius() const;  // max |x| over the closure
};

// Per-component perturbation h(x). It must return a symmetric matrix.
using Perturbation = std::function<Matrix2c(const Point&)>;

struct InclusionComponent {
  Shape shape;
  Perturbation h;
};

// gamma(x) = I + h(x) chi_D(x), D the union of the component shapes.
// Construction validates the geometry: every closure strictly inside the unit
// disk and pairwise disjoint.
class AdmittanceField {
public:
  AdmittanceField() = default;
  explicit AdmittanceField(std::vector<InclusionComponent> components,
                           std::vector<Shape> absorption_region = {});

  static AdmittanceField background() { return AdmittanceField(); }
  static Perturbation constant(const Matrix2c& h);

  const std::vector<InclusionComponent>& components() const { return components_; }
  // Empty means "all of D".
  const std::vector<Shape>& absorption_region() const { return absorption_; }
  bool empty() const { return components_.empty(); }

  // Index of the component containing x, or -1.
  int component_at(const Point& x) const;
  bool in_inclusion(const Point& x) const { return component_at(x) >= 0; }
  bool in_absorption_region(const Point& x) const;

  // h(x) chi_D(x); throws Domain for |x| > 1.
  Matrix2c perturbation(const Point& x) const;

  double clearance() const;  // distance from the closure of D to the unit circle

private:
  std::vector<InclusionComponent> components_;
  std::vector<Shape> absorption_;
};

Matrix2c evaluate_admittance(const AdmittanceField& field, const Point& x);

struct CoercivityVerdict {
  bool holds = false;
  double alpha = 0.0;
  cplx z = 1.0;
};

// min over points of the smallest eigenvalue of the Hermitian part of z gamma(x).
double coercivity_margin(const AdmittanceField& field, std::span<const Point> points, cplx z);

// Scans z = exp(2 pi i k / z_grid_size), k = 0..z_grid_size-1, keeping the first
// maximiser of the margin.
CoercivityVerdict check_coercivity(const AdmittanceField& field, std::span<const Point> points,
                                   int z_grid_size = 64);

struct AbsorptionVerdict {
  bool holds = false;
  double beta = 0.0;
  bool empty_region = false;
};

// Only the points inside the absorption region (default D) take part.
AbsorptionVerdict check_absorption(const AdmittanceField& field, std::span<const Point> points);

// Subset of points lying in the absorption region (defaults to D).
std::vector<Point> absorption_samples(const AdmittanceField& field, std::span<const Point> points);

// Eigenvalues (ascending) of a 2x2 Hermitian matrix.
Eigen::Vector2d hermitian_eigenvalues(const Matrix2c& m);

// Scenario document (JSON). Errors are Parse and name the offending field.
//   { "inclusions": [ { "shape": "disk", "center": [x, y], "radius": r,
//                       "h": { "xx": c, "xy": c, "yx": c, "yy": c } } ... ],
//     "absorption_region": [ shape ... ] }
// where c is a number or [re, im]; ellipses use "semi_axes": [a, b], "tilt".
AdmittanceField parse_scenario(const std::string& json_text);
AdmittanceField load_scenario(const std::string& path);

} // namespace lsm

#endif
