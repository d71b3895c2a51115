#include "lsm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "lsm/error.hpp"

namespace lsm {

namespace {

int ring_start(int k) { return k == 0 ? 0 : 1 + 3 * k * (k - 1); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

double DiskMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Point& a = vertices[tri[0]];
  const Point& b = vertices[tri[1]];
  const Point& c = vertices[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

Point DiskMesh::centroid(std::size_t t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double DiskMesh::max_edge_length() const {
  double longest = 0.0;
  for (const auto& tri : triangles) {
    for (int e = 0; e < 3; ++e) {
      longest = std::max(longest, (vertices[tri[e]] - vertices[tri[(e + 1) % 3]]).norm());
    }
  }
  return longest;
}

double DiskMesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) sum += triangle_area(t);
  return sum;
}

std::vector<Point> DiskMesh::centroids() const {
  std::vector<Point> out;
  out.reserve(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) out.push_back(centroid(t));
  return out;
}

DiskMesh build_disk_mesh(double h_target) {
  if (!(h_target > 0.0 && h_target <= 0.5)) {
    fail(ErrorCode::Configuration,
         "build_disk_mesh: h_target must lie in (0, 0.5], got " + format_double(h_target));
  }
  const int rings = 2 * std::max(1, static_cast<int>(std::floor(0.75 / h_target + 1e-9)));

  DiskMesh mesh;
  mesh.h_target = h_target;
  mesh.vertices.reserve(ring_start(rings + 1));
  mesh.vertices.emplace_back(0.0, 0.0);
  for (int k = 1; k <= rings; ++k) {
    const int count = 6 * k;
    const double radius = (k == rings) ? 1.0 : static_cast<double>(k) / rings;
    for (int j = 0; j < count; ++j) {
      const double a = 2.0 * kPi * j / count;
      mesh.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a));
    }
  }

  auto add = [&](int a, int b, int c) {
    mesh.triangles.push_back({a, b, c});
    if (mesh.triangle_area(mesh.triangles.size() - 1) < 0.0) {
      std::swap(mesh.triangles.back()[1], mesh.triangles.back()[2]);
    }
  };

  for (int j = 0; j < 6; ++j) add(0, 1 + j, 1 + (j + 1) % 6);

  // Zip consecutive rings together.
  for (int k = 1; k < rings; ++k) {
    const int inner_n = 6 * k;
    const int outer_n = 6 * (k + 1);
    const int inner0 = ring_start(k);
    const int outer0 = ring_start(k + 1);
    int i = 0;
    int j = 0;
    while (i < inner_n || j < outer_n) {
      bool advance_inner = j == outer_n;
      if (i < inner_n && j < outer_n) {
        // shorter new diagonal; angular order breaks near-ties
        const Point& vi = mesh.vertices[inner0 + (i + 1) % inner_n];
        const Point& vo = mesh.vertices[outer0 + (j + 1) % outer_n];
        const double d_inner = (vi - mesh.vertices[outer0 + j]).norm();
        const double d_outer = (vo - mesh.vertices[inner0 + i]).norm();
        if (std::abs(d_inner - d_outer) > 1e-12) {
          advance_inner = d_inner < d_outer;
        } else {
          advance_inner = static_cast<double>(i + 1) / inner_n < static_cast<double>(j + 1) / outer_n;
        }
      }
      if (advance_inner) {
        add(inner0 + i, inner0 + (i + 1) % inner_n, outer0 + j % outer_n);
        ++i;
      } else {
        add(inner0 + i % inner_n, outer0 + (j + 1) % outer_n, outer0 + j);
        ++j;
      }
    }
  }

  const int m = 6 * rings;
  const int b0 = ring_start(rings);
  mesh.boundary.resize(m);
  mesh.boundary_angle.resize(m);
  for (int j = 0; j < m; ++j) {
    mesh.boundary[j] = b0 + j;
    mesh.boundary_angle[j] = 2.0 * kPi * j / m;
  }
  return mesh;
}

void validate_mesh(const DiskMesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (v < 0 || v >= nv) fail(ErrorCode::Internal, "triangle references a missing vertex");
    }
    if (!(mesh.triangle_area(t) > 0.0)) {
      fail(ErrorCode::Internal, "triangle " + std::to_string(t) + " has non-positive area");
    }
  }
  if (mesh.boundary.size() != mesh.boundary_angle.size() || mesh.boundary.size() < 3) {
    fail(ErrorCode::Internal, "boundary description is inconsistent");
  }
  for (std::size_t k = 0; k < mesh.boundary.size(); ++k) {
    const Point& p = mesh.vertices.at(mesh.boundary[k]);
    if (std::abs(p.norm() - 1.0) > 1e-12) fail(ErrorCode::Internal, "boundary vertex off the unit circle");
    const double a = mesh.boundary_angle[k];
    if (a < 0.0 || a >= 2.0 * kPi) fail(ErrorCode::Internal, "boundary angle outside [0, 2pi)");
    if (k > 0 && !(a > mesh.boundary_angle[k - 1])) {
      fail(ErrorCode::Internal, "boundary angles not strictly increasing");
    }
  }

  // Interior edges shared by exactly two triangles, boundary edges by one and
  // lying on consecutive boundary vertices.
  std::map<std::pair<int, int>, int> edges;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e];
      int b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  }
  std::map<int, int> boundary_pos;
  for (std::size_t k = 0; k < mesh.boundary.size(); ++k) boundary_pos[mesh.boundary[k]] = static_cast<int>(k);
  std::size_t boundary_edges = 0;
  const int m = static_cast<int>(mesh.boundary.size());
  for (const auto& [edge, count] : edges) {
    if (count == 2) continue;
    if (count != 1) fail(ErrorCode::Internal, "edge shared by more than two triangles");
    auto ia = boundary_pos.find(edge.first);
    auto ib = boundary_pos.find(edge.second);
    if (ia == boundary_pos.end() || ib == boundary_pos.end()) {
      fail(ErrorCode::Internal, "non-conforming interior edge");
    }
    const int d = std::abs(ia->second - ib->second);
    if (d != 1 && d != m - 1) fail(ErrorCode::Internal, "boundary edge skips a boundary vertex");
    ++boundary_edges;
  }
  if (boundary_edges != mesh.boundary.size()) fail(ErrorCode::Internal, "boundary is not a closed loop");
}

void write_mesh(std::ostream& out, const DiskMesh& mesh) {
  out << "vertices " << mesh.vertices.size() << " triangles " << mesh.triangles.size()
      << " boundary " << mesh.boundary.size() << " h_target " << format_double(mesh.h_target) << '\n';
  for (const Point& p : mesh.vertices) out << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (std::size_t k = 0; k < mesh.boundary.size(); ++k) {
    out << mesh.boundary[k] << ' ' << format_double(mesh.boundary_angle[k]) << '\n';
  }
}

DiskMesh read_mesh(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) fail(ErrorCode::Parse, "mesh: missing header line");
  std::istringstream hs(header);
  std::string kv, kt, kb, kh;
  std::size_t nv = 0, nt = 0, nb = 0;
  std::string h_text;
  if (!(hs >> kv >> nv >> kt >> nt >> kb >> nb) || kv != "vertices" || kt != "triangles" || kb != "boundary") {
    fail(ErrorCode::Parse, "mesh: malformed header '" + header + "'");
  }
  DiskMesh mesh;
  if (hs >> kh >> h_text && kh == "h_target") mesh.h_target = std::strtod(h_text.c_str(), nullptr);

  auto read_double = [&](const char* what) {
    std::string tok;
    if (!(in >> tok)) fail(ErrorCode::Parse, std::string("mesh: truncated ") + what + " section");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') fail(ErrorCode::Parse, "mesh: bad number '" + tok + "'");
    return v;
  };
  auto read_int = [&](const char* what) {
    long long v = 0;
    if (!(in >> v)) fail(ErrorCode::Parse, std::string("mesh: truncated ") + what + " section");
    return static_cast<int>(v);
  };

  mesh.vertices.resize(nv);
  for (auto& p : mesh.vertices) {
    p.x() = read_double("vertex");
    p.y() = read_double("vertex");
  }
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles) {
    for (int& v : t) v = read_int("triangle");
  }
  mesh.boundary.resize(nb);
  mesh.boundary_angle.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    mesh.boundary[k] = read_int("boundary");
    mesh.boundary_angle[k] = read_double("boundary");
  }
  validate_mesh(mesh);
  return mesh;
}

// ---------------------------------------------------------------------------

BoundaryField::BoundaryField(int order, double smoothness)
    : order_(order), smoothness_(smoothness), coeffs_(CVector::Zero(2 * order)) {
  if (order < 0) fail(ErrorCode::InvalidArgument, "BoundaryField: negative order");
}

BoundaryField::BoundaryField(CVector coeffs, double smoothness)
    : order_(static_cast<int>(coeffs.size() / 2)), smoothness_(smoothness), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() % 2 != 0) fail(ErrorCode::Dimension, "BoundaryField: coefficient count must be even");
}

double BoundaryField::sobolev_norm(double s) const {
  double sum = 0.0;
  for (int i = 0; i < coeffs_.size(); ++i) {
    const double n = std::abs(mode_of(i, order_));
    sum += std::pow(n, 2.0 * s) * std::norm(coeffs_[i]);
  }
  return std::sqrt(sum);
}

bool BoundaryField::is_real(double tol) const {
  for (int n = 1; n <= order_; ++n) {
    if (std::abs((*this)[-n] - std::conj((*this)[n])) > tol) return false;
  }
  return true;
}

cplx BoundaryField::evaluate(double theta) const {
  cplx sum = 0.0;
  for (int i = 0; i < coeffs_.size(); ++i) {
    sum += coeffs_[i] * std::polar(1.0, mode_of(i, order_) * theta);
  }
  return sum;
}

Eigen::VectorXd sobolev_weights(int order, double s) {
  Eigen::VectorXd w(2 * order);
  for (int i = 0; i < 2 * order; ++i) w[i] = std::pow(std::abs(BoundaryField::mode_of(i, order)), s);
  return w;
}

namespace {

BoundaryField fourier_from_samples(std::span<const double> angles, std::span<const cplx> values,
                                   int order, double smoothness) {
  const std::size_t m = angles.size();
  if (2 * static_cast<std::size_t>(order) + 1 > m) {
    fail(ErrorCode::Aliasing, "Fourier order " + std::to_string(order) + " needs at least " +
                                  std::to_string(2 * order + 1) + " boundary samples, have " +
                                  std::to_string(m));
  }
  // Periodic trapezoid weights, normalised by 2 pi.
  std::vector<double> weight(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double prev = k == 0 ? angles[m - 1] - 2.0 * kPi : angles[k - 1];
    const double next = k + 1 == m ? angles[0] + 2.0 * kPi : angles[k + 1];
    weight[k] = 0.5 * (next - prev) / (2.0 * kPi);
  }
  BoundaryField field(order, smoothness);
  for (int i = 0; i < 2 * order; ++i) {
    const int n = BoundaryField::mode_of(i, order);
    cplx sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) sum += weight[k] * values[k] * std::polar(1.0, -n * angles[k]);
    field.coeffs()[i] = sum;
  }
  return field;
}

} // namespace

BoundaryField trace_to_fourier(const DiskMesh& mesh, std::span<const cplx> nodal, int order,
                               double smoothness) {
  if (nodal.size() != mesh.boundary.size()) {
    fail(ErrorCode::Dimension, "trace_to_fourier: expected one value per boundary vertex");
  }
  return fourier_from_samples(mesh.boundary_angle, nodal, order, smoothness);
}

BoundaryField uniform_samples_to_fourier(std::span<const cplx> samples, int order, double smoothness) {
  std::vector<double> angles(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) angles[k] = 2.0 * kPi * k / samples.size();
  return fourier_from_samples(angles, samples, order, smoothness);
}

std::vector<cplx> fourier_to_trace(const BoundaryField& field, const DiskMesh& mesh) {
  std::vector<cplx> out(mesh.boundary.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = field.evaluate(mesh.boundary_angle[k]);
  return out;
}

} // namespace lsm
