#include "lsm/dipole.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsm/error.hpp"

namespace lsm {

DipoleSpec::DipoleSpec(Point source_point, Point dir) : source(source_point), direction(dir) {
  if (std::abs(direction.norm() - 1.0) > 1e-12) fail(ErrorCode::InvalidArgument, "dipole direction must be a unit vector");
  if (!(source.norm() < 1.0)) fail(ErrorCode::Domain, "dipole source must lie strictly inside the unit disk");
}

double dipole_field(const Point& x, const DipoleSpec& spec) {
  const Point d = x - spec.source;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) fail(ErrorCode::Singularity, "dipole field evaluated at its source");
  return -spec.direction.dot(d) / (2.0 * kPi * r2);
}

Point dipole_field_gradient(const Point& x, const DipoleSpec& spec) {
  const Point d = x - spec.source;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) fail(ErrorCode::Singularity, "dipole field evaluated at its source");
  const double ad = spec.direction.dot(d);
  return -(spec.direction / r2 - 2.0 * ad * d / (r2 * r2)) / (2.0 * kPi);
}

double greens_function(const Point& x, const Point& z) {
  const double r = (x - z).norm();
  if (r == 0.0) fail(ErrorCode::Singularity, "Green's function evaluated at coincident points");
  return -std::log(r) / (2.0 * kPi);
}

Point greens_function_gradient(const Point& x, const Point& z) {
  const Point d = x - z;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) fail(ErrorCode::Singularity, "Green's function evaluated at coincident points");
  return -d / (2.0 * kPi * r2);
}

// ---------------------------------------------------------------------------

SingularTraceSolver::SingularTraceSolver(const DiskMesh& mesh)
    : mesh_(mesh), background_(assemble_system(mesh_, AdmittanceField::background())) {}

BoundaryField SingularTraceSolver::trace(const DipoleSpec& spec, int order) const {
  const double clearance = 1.0 - spec.source.norm();
  if (clearance < 2.0 * mesh_.h_target) {
    fail(ErrorCode::Accuracy, "singular_trace: source at distance " + std::to_string(clearance) +
                                  " from the boundary; need at least 2 h_target = " +
                                  std::to_string(2.0 * mesh_.h_target));
  }
  const std::size_t m = mesh_.boundary.size();
  std::vector<cplx> free_trace(m);
  std::vector<cplx> current(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Point& x = mesh_.vertices[mesh_.boundary[k]];
    free_trace[k] = dipole_field(x, spec);
    current[k] = dipole_field_gradient(x, spec).dot(x);  // outward normal is x
  }
  const std::vector<cplx> correction = background_.boundary_trace(background_.solve_nodal_current(current));
  for (std::size_t k = 0; k < m; ++k) free_trace[k] -= correction[k];
  return trace_to_fourier(mesh_, free_trace, order, 0.5);
}

BoundaryField singular_trace(const DiskMesh& mesh, const DipoleSpec& spec, int order) {
  return SingularTraceSolver(mesh).trace(spec, order);
}

// ---------------------------------------------------------------------------

AuxCircle::AuxCircle(double r, int q) : radius(r), nodes(q) {
  if (!(radius > 1.0)) fail(ErrorCode::Configuration, "auxiliary circle radius must exceed 1");
  if (nodes < 4) fail(ErrorCode::Configuration, "auxiliary circle needs at least 4 nodes");
}

double AuxCircle::angle(int j) const { return 2.0 * kPi * j / nodes; }

Point AuxCircle::node(int j) const { return radius * Point(std::cos(angle(j)), std::sin(angle(j))); }

namespace {

void check_target(const AuxCircle& aux, const Point& x) {
  const double r = x.norm();
  if (std::abs(r - aux.radius) <= 1e-12 * aux.radius) fail(ErrorCode::Singularity, "single layer target lies on the auxiliary circle");
  if (r > aux.radius) fail(ErrorCode::Domain, "single layer target lies outside the auxiliary circle");
}

} // namespace

CMatrix single_layer_matrix(const AuxCircle& aux, std::span<const Point> targets) {
  CMatrix s(targets.size(), aux.nodes);
  for (std::size_t p = 0; p < targets.size(); ++p) {
    check_target(aux, targets[p]);
    for (int j = 0; j < aux.nodes; ++j) s(p, j) = aux.weight() * greens_function(targets[p], aux.node(j));
  }
  return s;
}

std::pair<CMatrix, CMatrix> single_layer_gradient_matrix(const AuxCircle& aux, std::span<const Point> targets) {
  CMatrix gx(targets.size(), aux.nodes);
  CMatrix gy(targets.size(), aux.nodes);
  for (std::size_t p = 0; p < targets.size(); ++p) {
    check_target(aux, targets[p]);
    for (int j = 0; j < aux.nodes; ++j) {
      const Point g = aux.weight() * greens_function_gradient(targets[p], aux.node(j));
      gx(p, j) = g.x();
      gy(p, j) = g.y();
    }
  }
  return {gx, gy};
}

CMatrix layer_operator_quadrature(const AuxCircle& aux, int order, int samples) {
  if (samples <= 0) samples = std::max(2 * aux.nodes, 4 * order + 4);
  CMatrix out(2 * order, aux.nodes);
  std::vector<cplx> column(samples);
  for (int j = 0; j < aux.nodes; ++j) {
    const Point z = aux.node(j);
    for (int k = 0; k < samples; ++k) {
      const double t = 2.0 * kPi * k / samples;
      const Point x(std::cos(t), std::sin(t));
      column[k] = aux.weight() * greens_function_gradient(x, z).dot(x);
    }
    out.col(j) = uniform_samples_to_fourier(column, order, -0.5).coeffs();
  }
  return out;
}

double layer_mode_multiplier(double radius, int k) {
  if (k == 0) return 0.0;
  return 0.5 * std::pow(radius, 1.0 - std::abs(k));
}

CMatrix layer_operator_fourier(const AuxCircle& aux, int order) {
  CMatrix out(2 * order, aux.nodes);
  for (int i = 0; i < 2 * order; ++i) {
    const int k = BoundaryField::mode_of(i, order);
    const double mult = layer_mode_multiplier(aux.radius, k) / aux.nodes;
    for (int j = 0; j < aux.nodes; ++j) out(i, j) = mult * std::polar(1.0, -k * aux.angle(j));
  }
  return out;
}

BoundaryField apply_layer(const CMatrix& layer, const CVector& density) {
  if (layer.cols() != density.size()) fail(ErrorCode::Dimension, "apply_layer: density size mismatch");
  return BoundaryField(CVector(layer * density), -0.5);
}

} // namespace lsm
