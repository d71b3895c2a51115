#ifndef LSM_DIPOLE_HPP
#define LSM_DIPOLE_HPP

#include <memory>
#include <span>
#include <vector>

#include "lsm/forward.hpp"
#include "lsm/geometry.hpp"

namespace lsm {

// Point dipole at `source` (|source| < 1) pointing along the unit vector `direction`.
struct DipoleSpec {
  Point source = Point::Zero();
  Point direction = Point::UnitX();

  DipoleSpec() = default;
  DipoleSpec(Point source, Point direction);
};

// direction . Psi(x - y) with Psi(d) = -d / (2 pi |d|^2). Singularity at x = y.
double dipole_field(const Point& x, const DipoleSpec& spec);
Point dipole_field_gradient(const Point& x, const DipoleSpec& spec);

// (1 / 2 pi) log(1 / |x - z|)
double greens_function(const Point& x, const Point& z);
Point greens_function_gradient(const Point& x, const Point& z);  // w.r.t. x

// Boundary trace of the Neumann singular solution
//   Phi = a.Psi(. - y) - T0(d_nu a.Psi(. - y)) - c_y
// with T0 realised by the background finite element solver on `mesh`. The
// constant c_y disappears in the zero-mean representation. Reuse one instance
// for many sources; trace() is const and thread-safe.
class SingularTraceSolver {
public:
  explicit SingularTraceSolver(const DiskMesh& mesh);

  // Throws Accuracy when the source is closer than 2 h_target to the boundary.
  BoundaryField trace(const DipoleSpec& spec, int order) const;

  const DiskMesh& mesh() const { return mesh_; }

private:
  DiskMesh mesh_;
  FemSystem background_;
};

BoundaryField singular_trace(const DiskMesh& mesh, const DipoleSpec& spec, int order);

// Auxiliary circle of radius R > 1 carrying density samples at Q uniform angles.
struct AuxCircle {
  double radius = 2.0;
  int nodes = 128;

  AuxCircle() = default;
  AuxCircle(double radius, int nodes);

  Point node(int j) const;
  double angle(int j) const;
  double weight() const { return 2.0 * kPi * radius / nodes; }
};

// Trapezoid discretisation of omega -> int G(x, z) omega(z) dS(z) at interior
// points (|x| < R). Throws Singularity for targets on the circle.
CMatrix single_layer_matrix(const AuxCircle& aux, std::span<const Point> targets);
// x and y derivatives of the same potential.
std::pair<CMatrix, CMatrix> single_layer_gradient_matrix(const AuxCircle& aux, std::span<const Point> targets);

// Normal derivative of the single layer on the unit circle, as a map from
// density samples to Fourier coefficients (smoothness -1/2) of order N.
// Evaluated by quadrature at `samples` uniform boundary angles (0: max(2Q, 4N + 4)).
CMatrix layer_operator_quadrature(const AuxCircle& aux, int order, int samples = 0);

// Closed form of the same operator: mode k of the density is scaled by
// (1/2) R^{1-|k|}.
double layer_mode_multiplier(double radius, int k);
CMatrix layer_operator_fourier(const AuxCircle& aux, int order);

// Applies an operator from the functions above to a density vector.
BoundaryField apply_layer(const CMatrix& layer, const CVector& density);

} // namespace lsm

#endif
