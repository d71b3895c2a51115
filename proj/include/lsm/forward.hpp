#ifndef LSM_FORWARD_HPP
#define LSM_FORWARD_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "lsm/geometry.hpp"
#include "lsm/media.hpp"

namespace lsm {

struct Provenance {
  enum class Kind { Analytic, Fem, Noisy };
  Kind kind = Kind::Analytic;
  double level = 0.0;
  std::uint64_t seed = 0;

  // "analytic", "fem" or "noisy:<level>:<seed>"
  std::string tag() const;
  static Provenance parse(const std::string& tag);
};

// Neumann-to-Dirichlet map in the Fourier basis. Entry (i, j) is the
// coefficient of mode mode_of(i) in the voltage produced by the current
// exp(i mode_of(j) theta); rows and columns follow BoundaryField order.
struct NdMap {
  int order = 0;
  CMatrix matrix;
  Provenance provenance;

  static constexpr double source_smoothness = -0.5;
  static constexpr double target_smoothness = 0.5;

  cplx operator()(int m, int n) const {
    return matrix(BoundaryField::index_of(m, order), BoundaryField::index_of(n, order));
  }
  BoundaryField apply(const BoundaryField& current) const;
};

// ||M - M^R||_F / ||M||_F where M^R(m, n) = M(-n, -m).
double reciprocity_defect(const NdMap& map);

using SparseCMatrix = Eigen::SparseMatrix<cplx>;

// P1 discretisation of div(gamma grad u) = 0 with Neumann data and a
// zero-mean boundary trace enforced by one Lagrange multiplier. The
// factorisation is computed once; solve() is const and may be called from
// several threads.
class FemSystem {
public:
  FemSystem(FemSystem&&) noexcept;
  FemSystem& operator=(FemSystem&&) noexcept;
  ~FemSystem();

  // Stiffness matrix on the mesh vertices, before the constraint is added.
  const SparseCMatrix& stiffness() const { return stiffness_; }
  std::size_t vertex_count() const { return vertex_count_; }
  std::span<const int> boundary() const { return boundary_; }

  // Nodal potential for the current f (lumped boundary load).
  std::vector<cplx> solve(const BoundaryField& current) const;
  // Same, with the current given by its values at the boundary vertices. The
  // discrete mean is removed first.
  std::vector<cplx> solve_nodal_current(std::span<const cplx> boundary_current) const;

  std::vector<cplx> boundary_trace(std::span<const cplx> nodal) const;

private:
  friend FemSystem assemble_system(const DiskMesh&, const AdmittanceField&);
  FemSystem() = default;

  struct Factorization;
  std::size_t vertex_count_ = 0;
  std::vector<int> boundary_;
  std::vector<double> angles_;
  SparseCMatrix stiffness_;
  std::unique_ptr<Factorization> lu_;
};

// Refuses (Coercivity) when the coercivity check fails on triangle centroids.
FemSystem assemble_system(const DiskMesh& mesh, const AdmittanceField& field);

inline std::vector<cplx> solve_neumann(const FemSystem& system, const BoundaryField& current) {
  return system.solve(current);
}

NdMap compute_nd_map(const DiskMesh& mesh, const AdmittanceField& field, int order, int threads = 1);
NdMap compute_nd_map(const DiskMesh& mesh, const FemSystem& system, int order, int threads = 1);
NdMap compute_background_nd_map(const DiskMesh& mesh, int order, int threads = 1);
// diag(1/|n|)
NdMap analytic_background_nd_map(int order);

// M + level ||M||_F E / ||E||_F, E a seeded complex Gaussian matrix made
// reciprocity-symmetric. Deterministic in (level, seed).
NdMap add_noise(const NdMap& map, double level, std::uint64_t seed);

// Text format: "ndmap N <N> provenance <tag>", then 2N rows of 2N "re im"
// pairs, 17 significant digits.
void write_ndmap(std::ostream& out, const NdMap& map);
NdMap read_ndmap(std::istream& in);
void save_ndmap(const std::string& path, const NdMap& map);
NdMap load_ndmap(const std::string& path);

} // namespace lsm

#endif
