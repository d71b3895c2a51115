#include "lsm/forward.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/SparseLU>

#include "lsm/error.hpp"
#include "parallel.hpp"

namespace lsm {

std::string Provenance::tag() const {
  switch (kind) {
    case Kind::Analytic: return "analytic";
    case Kind::Fem: return "fem";
    case Kind::Noisy: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "noisy:%.17g:%llu", level, static_cast<unsigned long long>(seed));
      return buf;
    }
  }
  return "unknown";
}

Provenance Provenance::parse(const std::string& tag) {
  if (tag == "analytic") return {Kind::Analytic};
  if (tag == "fem") return {Kind::Fem};
  if (tag.rfind("noisy:", 0) == 0) {
    const auto colon = tag.find(':', 6);
    if (colon == std::string::npos) fail(ErrorCode::Parse, "ndmap: bad provenance tag '" + tag + "'");
    Provenance p{Kind::Noisy};
    char* end = nullptr;
    const std::string level = tag.substr(6, colon - 6);
    p.level = std::strtod(level.c_str(), &end);
    if (end == level.c_str() || *end) fail(ErrorCode::Parse, "ndmap: bad noise level in '" + tag + "'");
    const std::string seed = tag.substr(colon + 1);
    p.seed = std::strtoull(seed.c_str(), &end, 10);
    if (seed.empty() || *end) fail(ErrorCode::Parse, "ndmap: bad noise seed in '" + tag + "'");
    return p;
  }
  fail(ErrorCode::Parse, "ndmap: unknown provenance tag '" + tag + "'");
}

BoundaryField NdMap::apply(const BoundaryField& current) const {
  if (current.order() != order) fail(ErrorCode::Dimension, "NdMap::apply: order mismatch");
  return BoundaryField(CVector(matrix * current.coeffs()), target_smoothness);
}

double reciprocity_defect(const NdMap& map) {
  const int n = 2 * map.order;
  CMatrix mirrored(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // (m, k) -> (-k, -m)
      const int m = BoundaryField::mode_of(i, map.order);
      const int k = BoundaryField::mode_of(j, map.order);
      mirrored(i, j) = map(-k, -m);
    }
  }
  const double scale = map.matrix.norm();
  return scale == 0.0 ? 0.0 : (map.matrix - mirrored).norm() / scale;
}

// ---------------------------------------------------------------------------

struct FemSystem::Factorization {
  Eigen::SparseLU<SparseCMatrix, Eigen::COLAMDOrdering<int>> lu;
};

FemSystem::FemSystem(FemSystem&&) noexcept = default;
FemSystem& FemSystem::operator=(FemSystem&&) noexcept = default;
FemSystem::~FemSystem() = default;

namespace {

// Arc-length trapezoid weights of the boundary vertices (sum 2 pi).
std::vector<double> arc_weights(std::span<const double> angles) {
  const std::size_t m = angles.size();
  std::vector<double> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double prev = k == 0 ? angles[m - 1] - 2.0 * kPi : angles[k - 1];
    const double next = k + 1 == m ? angles[0] + 2.0 * kPi : angles[k + 1];
    w[k] = 0.5 * (next - prev);
  }
  return w;
}

} // namespace

FemSystem assemble_system(const DiskMesh& mesh, const AdmittanceField& field) {
  const std::vector<Point> centroids = mesh.centroids();
  if (!field.empty()) {
    const CoercivityVerdict verdict = check_coercivity(field, centroids);
    if (!verdict.holds) {
      fail(ErrorCode::Coercivity, "assemble_system: no rotation z makes Re(z gamma) coercive on the mesh "
                                  "(best margin " + std::to_string(verdict.alpha) + "); refusing to assemble");
    }
  }

  FemSystem sys;
  const int nv = static_cast<int>(mesh.vertices.size());
  sys.vertex_count_ = nv;
  sys.boundary_ = mesh.boundary;
  sys.angles_ = mesh.boundary_angle;

  std::vector<Eigen::Triplet<cplx>> entries;
  entries.reserve(mesh.triangles.size() * 9 + 2 * mesh.boundary.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.triangle_area(t);
    Eigen::Matrix<double, 2, 3> grad;
    for (int i = 0; i < 3; ++i) {
      const Point& pj = mesh.vertices[tri[(i + 1) % 3]];
      const Point& pk = mesh.vertices[tri[(i + 2) % 3]];
      grad(0, i) = (pj.y() - pk.y()) / (2.0 * area);
      grad(1, i) = (pk.x() - pj.x()) / (2.0 * area);
    }
    const Matrix2c gamma = evaluate_admittance(field, centroids[t]);
    const Eigen::Matrix3cd local = area * grad.transpose().cast<cplx>() * gamma * grad.cast<cplx>();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) entries.emplace_back(tri[i], tri[j], local(i, j));
    }
  }
  sys.stiffness_.resize(nv, nv);
  sys.stiffness_.setFromTriplets(entries.begin(), entries.end());

  // Saddle-point system [K c; c^T 0] with c the boundary mean functional.
  const std::vector<double> w = arc_weights(mesh.boundary_angle);
  const double scale = static_cast<double>(mesh.boundary.size()) / (2.0 * kPi);
  for (std::size_t k = 0; k < mesh.boundary.size(); ++k) {
    entries.emplace_back(mesh.boundary[k], nv, w[k] * scale);
    entries.emplace_back(nv, mesh.boundary[k], w[k] * scale);
  }
  SparseCMatrix saddle(nv + 1, nv + 1);
  saddle.setFromTriplets(entries.begin(), entries.end());
  saddle.makeCompressed();

  sys.lu_ = std::make_unique<FemSystem::Factorization>();
  sys.lu_->lu.compute(saddle);
  if (sys.lu_->lu.info() != Eigen::Success) {
    fail(ErrorCode::Solver, "assemble_system: factorisation failed: " + sys.lu_->lu.lastErrorMessage());
  }
  return sys;
}

std::vector<cplx> FemSystem::solve_nodal_current(std::span<const cplx> boundary_current) const {
  if (boundary_current.size() != boundary_.size()) {
    fail(ErrorCode::Dimension, "solve_nodal_current: expected one value per boundary vertex");
  }
  const std::vector<double> w = arc_weights(angles_);
  cplx mean = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) mean += w[k] * boundary_current[k];
  mean /= 2.0 * kPi;

  CVector rhs = CVector::Zero(static_cast<Eigen::Index>(vertex_count_) + 1);
  for (std::size_t k = 0; k < boundary_.size(); ++k) rhs[boundary_[k]] = w[k] * (boundary_current[k] - mean);
  const CVector x = lu_->lu.solve(rhs);
  if (lu_->lu.info() != Eigen::Success || !x.allFinite()) fail(ErrorCode::Solver, "solve_neumann: solve failed");
  return std::vector<cplx>(x.data(), x.data() + vertex_count_);
}

std::vector<cplx> FemSystem::solve(const BoundaryField& current) const {
  std::vector<cplx> g(boundary_.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = current.evaluate(angles_[k]);
  return solve_nodal_current(g);
}

std::vector<cplx> FemSystem::boundary_trace(std::span<const cplx> nodal) const {
  std::vector<cplx> out(boundary_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = nodal[boundary_[k]];
  return out;
}

// ---------------------------------------------------------------------------

NdMap compute_nd_map(const DiskMesh& mesh, const FemSystem& system, int order, int threads) {
  if (order < 1) fail(ErrorCode::InvalidArgument, "compute_nd_map: order must be >= 1");
  if (2 * static_cast<std::size_t>(order) + 1 > mesh.boundary.size()) {
    fail(ErrorCode::Aliasing, "compute_nd_map: order " + std::to_string(order) + " too large for " +
                                  std::to_string(mesh.boundary.size()) + " boundary vertices");
  }
  NdMap map;
  map.order = order;
  map.provenance = {Provenance::Kind::Fem};
  map.matrix = CMatrix::Zero(2 * order, 2 * order);
  detail::parallel_for(2 * order, threads, [&](std::size_t j) {
    BoundaryField current(order, NdMap::source_smoothness);
    current.coeffs()[j] = 1.0;
    const std::vector<cplx> u = system.solve(current);
    const std::vector<cplx> trace = system.boundary_trace(u);
    map.matrix.col(j) = trace_to_fourier(mesh, trace, order, NdMap::target_smoothness).coeffs();
  });
  return map;
}

NdMap compute_nd_map(const DiskMesh& mesh, const AdmittanceField& field, int order, int threads) {
  if (2 * static_cast<std::size_t>(order) + 1 > mesh.boundary.size()) {
    fail(ErrorCode::Aliasing, "compute_nd_map: order " + std::to_string(order) + " too large for " +
                                  std::to_string(mesh.boundary.size()) + " boundary vertices");
  }
  const FemSystem sys = assemble_system(mesh, field);
  return compute_nd_map(mesh, sys, order, threads);
}

NdMap compute_background_nd_map(const DiskMesh& mesh, int order, int threads) {
  return compute_nd_map(mesh, AdmittanceField::background(), order, threads);
}

NdMap analytic_background_nd_map(int order) {
  if (order < 1) fail(ErrorCode::InvalidArgument, "analytic_background_nd_map: order must be >= 1");
  NdMap map;
  map.order = order;
  map.provenance = {Provenance::Kind::Analytic};
  map.matrix = CMatrix::Zero(2 * order, 2 * order);
  for (int i = 0; i < 2 * order; ++i) map.matrix(i, i) = 1.0 / std::abs(BoundaryField::mode_of(i, order));
  return map;
}

NdMap add_noise(const NdMap& map, double level, std::uint64_t seed) {
  if (!(level >= 0.0 && level < 1.0)) fail(ErrorCode::InvalidArgument, "add_noise: level must lie in [0, 1)");
  NdMap out = map;
  out.provenance = {Provenance::Kind::Noisy, level, seed};
  if (level == 0.0) return out;

  const int n = 2 * map.order;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix e(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      e(i, j) = cplx(re, im);
    }
  }
  CMatrix sym(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int m = BoundaryField::mode_of(i, map.order);
      const int k = BoundaryField::mode_of(j, map.order);
      sym(i, j) = 0.5 * (e(i, j) + e(BoundaryField::index_of(-k, map.order), BoundaryField::index_of(-m, map.order)));
    }
  }
  out.matrix = map.matrix + (level * map.matrix.norm() / sym.norm()) * sym;
  return out;
}

// ---------------------------------------------------------------------------

void write_ndmap(std::ostream& out, const NdMap& map) {
  out << "ndmap N " << map.order << " provenance " << map.provenance.tag() << '\n';
  char buf[96];
  for (int i = 0; i < map.matrix.rows(); ++i) {
    for (int j = 0; j < map.matrix.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.17g %.17g", j ? " " : "", map.matrix(i, j).real(), map.matrix(i, j).imag());
      out << buf;
    }
    out << '\n';
  }
}

NdMap read_ndmap(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) fail(ErrorCode::Parse, "ndmap: missing header");
  std::istringstream hs(header);
  std::string magic, nkey, pkey, tag;
  int order = 0;
  if (!(hs >> magic >> nkey >> order >> pkey >> tag) || magic != "ndmap" || nkey != "N" || pkey != "provenance") {
    fail(ErrorCode::Parse, "ndmap: malformed header '" + header + "'");
  }
  if (order < 1) fail(ErrorCode::Parse, "ndmap: order must be positive");
  NdMap map;
  map.order = order;
  map.provenance = Provenance::parse(tag);
  map.matrix.resize(2 * order, 2 * order);
  for (int i = 0; i < 2 * order; ++i) {
    for (int j = 0; j < 2 * order; ++j) {
      double part[2];
      for (double& p : part) {
        std::string tok;
        if (!(in >> tok)) fail(ErrorCode::Parse, "ndmap: truncated at entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        char* end = nullptr;
        p = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end) fail(ErrorCode::Parse, "ndmap: bad number '" + tok + "'");
      }
      map.matrix(i, j) = cplx(part[0], part[1]);
    }
  }
  std::string extra;
  if (in >> extra) fail(ErrorCode::Parse, "ndmap: trailing data after matrix");
  return map;
}

void save_ndmap(const std::string& path, const NdMap& map) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  write_ndmap(out, map);
  if (!out) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

NdMap load_ndmap(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  return read_ndmap(in);
}

} // namespace lsm
