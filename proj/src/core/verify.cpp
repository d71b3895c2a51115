#include "lsm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "lsm/dipole.hpp"
#include "lsm/forward.hpp"
#include "lsm/sampling.hpp"

namespace lsm {

namespace {

constexpr int kCheckedModes = 8;

int usable_order(const DiskMesh& mesh, int order) {
  const int limit = (static_cast<int>(mesh.boundary.size()) - 1) / 2;
  return std::min(order, limit);
}

double two_phase_entry(int n, double rho, double sigma) {
  const double mu = (1.0 - sigma) / (1.0 + sigma);
  const double q = mu * std::pow(rho, 2.0 * std::abs(n));
  return (1.0 + q) / ((1.0 - q) * std::abs(n));
}

double spectrum_error(const NdMap& map, const std::function<double(int)>& exact) {
  double worst = 0.0;
  const int top = std::min(kCheckedModes, map.order);
  for (int n = -top; n <= top; ++n) {
    if (n == 0) continue;
    worst = std::max(worst, std::abs(map(n, n) - exact(n)) / exact(n));
  }
  return worst;
}

CheckResult run_check(const std::string& name, double required, const std::function<double()>& body) {
  CheckResult r;
  r.name = name;
  r.required = required;
  try {
    r.achieved = body();
    r.passed = std::isfinite(r.achieved) && r.achieved <= required;
  } catch (const std::exception& e) {
    r.achieved = std::numeric_limits<double>::infinity();
    r.detail = e.what();
  }
  return r;
}

} // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerifyReport run_verification(const VerifyConfig& config) {
  VerifyReport report;
  DiskMesh mesh;
  std::string mesh_error;
  try {
    mesh = build_disk_mesh(config.h_target);
  } catch (const std::exception& e) {
    mesh_error = e.what();
  }
  auto need_mesh = [&] {
    if (!mesh_error.empty()) throw std::runtime_error(mesh_error);
  };

  report.checks.push_back(run_check("background_spectrum", 0.02, [&] {
    need_mesh();
    const NdMap map = compute_background_nd_map(mesh, usable_order(mesh, config.order), config.threads);
    return spectrum_error(map, [](int n) { return 1.0 / std::abs(n); });
  }));

  report.checks.push_back(run_check("two_phase_spectrum", 0.02, [&] {
    need_mesh();
    const double rho = 0.5, sigma = 2.0;
    const AdmittanceField field({{Shape::disk(Point::Zero(), rho),
                                  AdmittanceField::constant(Matrix2c::Identity() * (sigma - 1.0))}});
    const NdMap map = compute_nd_map(mesh, field, usable_order(mesh, config.order), config.threads);
    return spectrum_error(map, [&](int n) { return two_phase_entry(n, rho, sigma); });
  }));

  report.checks.push_back(run_check("centered_dipole_trace", 0.01, [&] {
    need_mesh();
    const int order = usable_order(mesh, config.order);
    const BoundaryField phi = singular_trace(mesh, DipoleSpec(Point::Zero(), Point::UnitX()), order);
    const double c1 = -1.0 / (2.0 * kPi);
    double worst = 0.0;
    for (int n = -order; n <= order; ++n) {
      if (n == 0) continue;
      const double exact = std::abs(n) == 1 ? c1 : 0.0;
      worst = std::max(worst, std::abs(phi[n] - exact) / std::abs(c1));
    }
    return worst;
  }));

  report.checks.push_back(run_check("layer_mode_multipliers", 1e-8, [&] {
    const AuxCircle aux(2.0, 128);
    const CMatrix layer = layer_operator_quadrature(aux, kCheckedModes);
    double worst = 0.0;
    for (int k = -kCheckedModes; k <= kCheckedModes; ++k) {
      if (k == 0) continue;
      CVector density(aux.nodes);
      for (int j = 0; j < aux.nodes; ++j) density[j] = std::polar(1.0, k * aux.angle(j));
      const BoundaryField out = apply_layer(layer, density);
      const double exact = layer_mode_multiplier(aux.radius, k);
      worst = std::max(worst, std::abs(out[k] - exact) / exact);
    }
    return worst;
  }));

  const cplx a(0.7, -0.4), b(1.2, 0.5);
  report.checks.push_back(run_check("scalar_tikhonov", 1e-12, [&] {
    const double alpha = 0.3;
    const SpectralSolver solver(CMatrix::Constant(1, 1, a));
    const CVector x = solver.solve(solver.project(CVector::Constant(1, b)), alpha);
    const cplx exact = std::conj(a) * b / (std::norm(a) + alpha);
    return std::abs(x[0] - exact) / std::abs(exact);
  }));

  report.checks.push_back(run_check("scalar_morozov", 1e-6, [&] {
    const double delta = 0.4 * std::abs(b);
    const SpectralSolver solver(CMatrix::Constant(1, 1, a));
    const MorozovResult res = morozov(solver, CVector::Constant(1, b), delta);
    if (!res.feasible()) throw std::runtime_error("scalar Morozov problem reported infeasible");
    const double exact = delta * std::norm(a) / (std::abs(b) - delta);
    return std::abs(res.alpha - exact) / exact;
  }));

  return report;
}

void write_report(std::ostream& out, const VerifyReport& report) {
  char line[256];
  for (const CheckResult& c : report.checks) {
    std::snprintf(line, sizeof line, "%s %s achieved=%.3e required=%.3e", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.achieved, c.required);
    out << line;
    if (!c.detail.empty()) out << " (" << c.detail << ")";
    out << '\n';
  }
}

} // namespace lsm
