#ifndef LSM_GEOMETRY_HPP
#define LSM_GEOMETRY_HPP

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lsm {

using cplx = std::complex<double>;
using Point = Eigen::Vector2d;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Conforming triangulation of the closed unit disk. Boundary vertices sit on
// the unit circle, uniformly spaced in angle; `boundary[k]` has polar angle
// `boundary_angle[k]`, strictly increasing from 0.
struct DiskMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary;
  std::vector<double> boundary_angle;
  double h_target = 0.0;

  std::size_t boundary_count() const { return boundary.size(); }
  double triangle_area(std::size_t t) const;  // signed
  Point centroid(std::size_t t) const;
  double max_edge_length() const;
  double total_area() const;
  std::vector<Point> centroids() const;
};

// Structured ring mesh: ring k (k = 1..K) carries 6k vertices at radius k/K,
// K = 2 floor(0.75 / h_target) (even, so r = 1/2 is a ring). Throws Configuration unless 0 < h_target <= 0.5.
DiskMesh build_disk_mesh(double h_target);

// Throws Internal describing the first violated invariant, if any.
void validate_mesh(const DiskMesh& mesh);

// Plain-text mesh exchange:
//   vertices <V> triangles <T> boundary <B> h_target <h>
//   V lines "x y", T lines "i j k", B lines "vertex_index angle"
void write_mesh(std::ostream& out, const DiskMesh& mesh);
DiskMesh read_mesh(std::istream& in);

// Zero-mean function on the unit circle, f(theta) = sum_{1<=|n|<=N} c_n e^{i n theta}.
// Storage order is n = -N..-1, 1..N; there is no n = 0 slot.
class BoundaryField {
public:
  BoundaryField() = default;
  BoundaryField(int order, double smoothness);
  BoundaryField(CVector coeffs, double smoothness);

  int order() const { return order_; }
  double smoothness() const { return smoothness_; }
  void set_smoothness(double s) { smoothness_ = s; }

  cplx& operator[](int n) { return coeffs_[index_of(n, order_)]; }
  const cplx& operator[](int n) const { return coeffs_[index_of(n, order_)]; }

  const CVector& coeffs() const { return coeffs_; }
  CVector& coeffs() { return coeffs_; }

  // sqrt(sum |n|^{2s} |c_n|^2)
  double sobolev_norm(double s) const;
  double norm() const { return sobolev_norm(smoothness_); }

  bool is_real(double tol = 1e-12) const;

  // Evaluates the truncated series at the given angle.
  cplx evaluate(double theta) const;

  static int index_of(int n, int order) { return n < 0 ? n + order : n + order - 1; }
  static int mode_of(int index, int order) { return index < order ? index - order : index - order + 1; }

private:
  int order_ = 0;
  double smoothness_ = 0.0;
  CVector coeffs_;
};

// Diagonal Sobolev weights |n|^s in BoundaryField storage order.
Eigen::VectorXd sobolev_weights(int order, double s);

// Trapezoid-rule Fourier coefficients of nodal boundary data, mean discarded.
// Throws Aliasing if 2N + 1 exceeds the number of boundary vertices.
BoundaryField trace_to_fourier(const DiskMesh& mesh, std::span<const cplx> nodal, int order,
                               double smoothness);

// Same quadrature over an arbitrary uniform-in-angle sample set starting at 0.
BoundaryField uniform_samples_to_fourier(std::span<const cplx> samples, int order,
                                         double smoothness);

std::vector<cplx> fourier_to_trace(const BoundaryField& field, const DiskMesh& mesh);

} // namespace lsm

#endif
