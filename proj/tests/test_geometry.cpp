#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "lsm/error.hpp"
#include "lsm/geometry.hpp"

using namespace lsm;

namespace {

std::vector<cplx> sample(const DiskMesh& mesh, double (*f)(double)) {
  std::vector<cplx> out;
  for (double t : mesh.boundary_angle) out.emplace_back(f(t));
  return out;
}

double cos1(double t) { return std::cos(t); }
double sin3(double t) { return std::sin(3 * t); }
double one(double) { return 1.0; }

} // namespace

TEST_CASE("coarsest mesh satisfies the invariants") {
  const DiskMesh mesh = build_disk_mesh(0.5);
  CHECK_NOTHROW(validate_mesh(mesh));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) CHECK(mesh.triangle_area(t) > 0.0);

  // every interior edge is shared by exactly two triangles, boundary edges by one
  std::map<std::pair<int, int>, int> edges;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  int boundary_edges = 0;
  for (const auto& [edge, count] : edges) {
    CHECK(count <= 2);
    boundary_edges += count == 1;
  }
  CHECK(boundary_edges == static_cast<int>(mesh.boundary.size()));
}

TEST_CASE("disk area and boundary ordering at h = 0.05") {
  const DiskMesh mesh = build_disk_mesh(0.05);
  CHECK(std::abs(mesh.total_area() - kPi) / kPi < 0.01);
  for (std::size_t k = 1; k < mesh.boundary_angle.size(); ++k)
    CHECK(mesh.boundary_angle[k] > mesh.boundary_angle[k - 1]);
  CHECK(mesh.boundary_angle.front() == 0.0);
  for (int v : mesh.boundary) CHECK(std::abs(mesh.vertices[v].norm() - 1.0) < 1e-12);
  CHECK(mesh.max_edge_length() <= 1.5 * 0.05);
}

TEST_CASE("boundary spacing is uniform in angle") {
  const DiskMesh mesh = build_disk_mesh(0.1);
  const double step = 2 * kPi / mesh.boundary.size();
  for (std::size_t k = 0; k < mesh.boundary.size(); ++k)
    CHECK(mesh.boundary_angle[k] == doctest::Approx(k * step).epsilon(1e-12));
}

TEST_CASE("refinement quadruples triangles and halves edges") {
  const DiskMesh coarse = build_disk_mesh(0.1);
  const DiskMesh fine = build_disk_mesh(0.05);
  CHECK(fine.triangles.size() >= 4 * coarse.triangles.size());
  const double ratio = fine.max_edge_length() / coarse.max_edge_length();
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.2));
  for (double h : {0.5, 0.2, 0.1, 0.05, 0.02}) CHECK(build_disk_mesh(h).max_edge_length() <= 1.5 * h);
}

TEST_CASE("interface radius one half is a mesh ring") {
  const DiskMesh mesh = build_disk_mesh(0.04);
  int on_ring = 0;
  for (const Point& v : mesh.vertices) on_ring += std::abs(v.norm() - 0.5) < 1e-12;
  CHECK(on_ring > 0);
}

TEST_CASE("mesh size out of range") {
  CHECK_THROWS_AS(build_disk_mesh(0.0), Error);
  CHECK_THROWS_AS(build_disk_mesh(-0.1), Error);
  CHECK_THROWS_AS(build_disk_mesh(0.75), Error);
  try {
    build_disk_mesh(2.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Configuration);
  }
}

TEST_CASE("mesh text round trip") {
  const DiskMesh mesh = build_disk_mesh(0.2);
  std::stringstream ss;
  write_mesh(ss, mesh);
  const DiskMesh back = read_mesh(ss);
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  REQUIRE(back.triangles == mesh.triangles);
  CHECK(back.boundary == mesh.boundary);
  CHECK(back.boundary_angle == mesh.boundary_angle);
  CHECK(back.h_target == mesh.h_target);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) CHECK(back.vertices[i] == mesh.vertices[i]);
}

TEST_CASE("broken mesh files are rejected") {
  std::stringstream bad("vertices 3 triangles 1 boundary 3 h_target 0.5\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(bad), Error);
  std::stringstream junk("hello");
  CHECK_THROWS_AS(read_mesh(junk), Error);
}

TEST_CASE("validate_mesh catches a flipped triangle") {
  DiskMesh mesh = build_disk_mesh(0.25);
  std::swap(mesh.triangles[3][0], mesh.triangles[3][1]);
  CHECK_THROWS_AS(validate_mesh(mesh), Error);
}

TEST_CASE("Fourier storage order") {
  const int N = 5;
  std::set<int> seen;
  for (int i = 0; i < 2 * N; ++i) {
    const int n = BoundaryField::mode_of(i, N);
    CHECK(n != 0);
    CHECK(BoundaryField::index_of(n, N) == i);
    seen.insert(n);
  }
  CHECK(seen.size() == 2 * N);
  CHECK(BoundaryField::mode_of(0, N) == -N);
  CHECK(BoundaryField::mode_of(2 * N - 1, N) == N);
}

TEST_CASE("Sobolev norm") {
  BoundaryField f(3, 0.5);
  f[2] = cplx(3, 4);
  f[-1] = 1.0;
  CHECK(f.sobolev_norm(0.0) == doctest::Approx(std::sqrt(26.0)));
  CHECK(f.sobolev_norm(0.5) == doctest::Approx(std::sqrt(2 * 25.0 + 1)));
  CHECK(f.norm() == doctest::Approx(std::sqrt(51.0)));
  CHECK(f.sobolev_norm(-0.5) == doctest::Approx(std::sqrt(25.0 / 2 + 1)));
}

TEST_CASE("trace_to_fourier of cos and sin 3") {
  const DiskMesh mesh = build_disk_mesh(0.1);
  const BoundaryField c = trace_to_fourier(mesh, sample(mesh, cos1), 8, 0.5);
  for (int n = -8; n <= 8; ++n) {
    if (n == 0) continue;
    const double expect = std::abs(n) == 1 ? 0.5 : 0.0;
    CHECK(std::abs(c[n] - expect) < 1e-12);
  }
  const BoundaryField s = trace_to_fourier(mesh, sample(mesh, sin3), 8, 0.5);
  CHECK(std::abs(s[3] - cplx(0, -0.5)) < 1e-12);
  CHECK(std::abs(s[-3] - cplx(0, 0.5)) < 1e-12);
  CHECK(s.is_real());
}

TEST_CASE("constants are removed") {
  const DiskMesh mesh = build_disk_mesh(0.1);
  const BoundaryField c = trace_to_fourier(mesh, sample(mesh, one), 8, 0.5);
  CHECK(c.coeffs().norm() < 1e-13);
}

TEST_CASE("trace_to_fourier against a direct integral") {
  // f(t) = exp(cos t) has Fourier coefficients I_n(1) (modified Bessel).
  const DiskMesh mesh = build_disk_mesh(0.05);
  std::vector<cplx> nodal;
  for (double t : mesh.boundary_angle) nodal.emplace_back(std::exp(std::cos(t)));
  const BoundaryField c = trace_to_fourier(mesh, nodal, 6, 0.5);
  for (int n = 1; n <= 6; ++n) {
    // I_n(1) by its power series
    double bessel = 0.0, term = std::pow(0.5, n) / std::tgamma(n + 1.0);
    for (int k = 0; k < 30; ++k) {
      bessel += term;
      term *= 0.25 / ((k + 1.0) * (k + 1.0 + n));
    }
    CHECK(std::abs(c[n] - bessel) < 1e-12);
    CHECK(std::abs(c[-n] - bessel) < 1e-12);
  }
}

TEST_CASE("aliasing and size errors") {
  const DiskMesh mesh = build_disk_mesh(0.5);  // few boundary vertices
  const int limit = (static_cast<int>(mesh.boundary.size()) - 1) / 2;
  std::vector<cplx> nodal(mesh.boundary.size(), 0.0);
  CHECK_NOTHROW(trace_to_fourier(mesh, nodal, limit, 0.5));
  try {
    trace_to_fourier(mesh, nodal, limit + 1, 0.5);
    FAIL("expected aliasing error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Aliasing);
  }
  nodal.pop_back();
  CHECK_THROWS_AS(trace_to_fourier(mesh, nodal, 2, 0.5), Error);
}

TEST_CASE("fourier_to_trace synthesis") {
  const DiskMesh mesh = build_disk_mesh(0.1);
  BoundaryField f(4, 0.5);
  f[1] = 0.5;
  f[-1] = 0.5;
  const std::vector<cplx> v = fourier_to_trace(f, mesh);
  for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(v[k] - std::cos(mesh.boundary_angle[k])) < 1e-14);

  const std::vector<cplx> z = fourier_to_trace(BoundaryField(4, 0.5), mesh);
  for (const cplx& x : z) CHECK(x == cplx(0.0));

  BoundaryField g(4, 0.5);
  g[3] = cplx(0.2, -0.7);
  g[-2] = cplx(1.1, 0.3);
  const BoundaryField back = trace_to_fourier(mesh, fourier_to_trace(g, mesh), 4, 0.5);
  CHECK((back.coeffs() - g.coeffs()).norm() < 1e-13);
}

TEST_CASE("evaluate matches synthesis") {
  BoundaryField f(2, 0.0);
  f[2] = cplx(0.0, 1.0);
  CHECK(std::abs(f.evaluate(0.3) - cplx(0.0, 1.0) * std::polar(1.0, 0.6)) < 1e-15);
}
