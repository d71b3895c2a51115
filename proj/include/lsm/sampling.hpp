#ifndef LSM_SAMPLING_HPP
#define LSM_SAMPLING_HPP

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lsm/dipole.hpp"
#include "lsm/forward.hpp"
#include "lsm/geometry.hpp"

namespace lsm {

// Tikhonov regularisation of a fixed linear operator through its singular
// system. Norms are plain Euclidean norms of the coordinate vectors; callers
// fold any Sobolev weighting into the operator.
class SpectralSolver {
public:
  SpectralSolver() = default;
  explicit SpectralSolver(const CMatrix& op);

  const Eigen::VectorXd& singular_values() const { return sigma_; }
  const CMatrix& left() const { return u_; }
  const CMatrix& right() const { return v_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return v_.rows(); }

  // Rhs expressed in the singular basis; reused across alpha evaluations.
  struct Projection {
    CVector beta;
    double norm = 0.0;
    double out_of_range_sq = 0.0;  // part of the rhs orthogonal to range(U)
  };
  Projection project(const CVector& rhs) const;

  // Minimiser of ||A x - b||^2 + alpha ||x||^2; alpha = 0 gives the
  // pseudo-inverse solution over the numerically nonzero singular values.
  CVector solve(const Projection& p, double alpha) const;
  double residual(const Projection& p, double alpha) const;
  double solution_norm(const Projection& p, double alpha) const;
  // Residual in the alpha -> 0+ limit.
  double min_residual(const Projection& p) const;

  double rank_tolerance() const { return rank_tol_; }

private:
  Eigen::Index rows_ = 0;
  CMatrix u_;
  Eigen::VectorXd sigma_;
  CMatrix v_;
  double rank_tol_ = 0.0;
};

enum class MorozovStatus { Feasible, InfeasibleLow, InfeasibleHigh };
const char* to_string(MorozovStatus s);

struct MorozovResult {
  MorozovStatus status = MorozovStatus::Feasible;
  double alpha = 0.0;  // +inf for InfeasibleHigh, 0 for InfeasibleLow
  double delta = 0.0;
  double residual = 0.0;
  double min_residual = 0.0;
  double rhs_norm = 0.0;
  CVector solution;
  bool feasible() const { return status == MorozovStatus::Feasible; }
};

// Picks alpha with residual(alpha) = delta by bisection in log(alpha); the
// residual is strictly increasing in alpha. Achieved |residual - delta| <= 1e-9 delta.
MorozovResult morozov(const SpectralSolver& solver, const CVector& rhs, double delta);

// Lambda - Lambda0 with its Sobolev-weighted form W A W, W = diag(|n|^{1/2}).
class RelativeData {
public:
  RelativeData(const NdMap& measured, const NdMap& background);

  int order() const { return order_; }
  const CMatrix& difference() const { return difference_; }
  const CMatrix& weighted() const { return weighted_; }
  const Eigen::VectorXd& half_weights() const { return w_half_; }
  const SpectralSolver& solver() const { return solver_; }
  const Eigen::VectorXd& singular_values() const { return solver_.singular_values(); }

  // phi (smoothness +1/2) in weighted coordinates and back for psi (-1/2).
  CVector weigh_rhs(const BoundaryField& rhs) const;
  BoundaryField unweigh_solution(const CVector& weighted) const;

private:
  int order_ = 0;
  CMatrix difference_;
  CMatrix weighted_;
  Eigen::VectorXd w_half_;
  SpectralSolver solver_;
};

inline RelativeData make_relative_data(const NdMap& measured, const NdMap& background) {
  return RelativeData(measured, background);
}

// argmin ||A psi - phi||_{1/2}^2 + alpha ||psi||_{-1/2}^2
BoundaryField tikhonov_solve(const RelativeData& data, const BoundaryField& rhs, double alpha);
double tikhonov_residual(const RelativeData& data, const BoundaryField& rhs, double alpha);

struct MorozovSolution {
  MorozovResult result;
  BoundaryField psi;
};
MorozovSolution morozov_alpha(const RelativeData& data, const BoundaryField& rhs, double delta);

// Density parameterisation psi = L omega with L the layer operator of an
// auxiliary circle; the penalty is the L2(dOmega) norm of omega.
class DensityProblem {
public:
  DensityProblem(const RelativeData& data, const AuxCircle& aux);

  const AuxCircle& aux() const { return aux_; }
  const SpectralSolver& solver() const { return solver_; }

  struct Solution {
    CVector density;     // samples of omega on the auxiliary circle
    BoundaryField psi;   // L omega
    double residual = 0.0;
    double density_norm = 0.0;  // L2(dOmega)
    MorozovStatus status = MorozovStatus::Feasible;
    double alpha = 0.0;
  };
  Solution solve(const BoundaryField& rhs, double alpha) const;
  Solution solve_morozov(const BoundaryField& rhs, double delta) const;

private:
  Solution finish(const CVector& scaled_density, double residual) const;

  const RelativeData* data_;  // not owned; must outlive this object
  AuxCircle aux_;
  CMatrix layer_;
  SpectralSolver solver_;
};

DensityProblem::Solution reconstruct_via_density(const RelativeData& data, const AuxCircle& aux,
                                                 const BoundaryField& rhs, double alpha);

// ---------------------------------------------------------------------------
// Indicator sweep

struct GridSpec {
  double spacing = 0.05;
  double r_max = 0.9;
};

enum class DirectionStrategy { Max, Mean, X, Y };
const char* to_string(DirectionStrategy s);
DirectionStrategy parse_direction_strategy(const std::string& name);

struct SweepOptions {
  GridSpec grid;
  double epsilon = 1e-2;  // delta = epsilon ||phi_y||_{1/2}
  DirectionStrategy directions = DirectionStrategy::Max;
  int threads = 1;
  // When set, the density form is solved too (same delta) and its norm recorded.
  std::optional<AuxCircle> density;
};

struct DirectionOutcome {
  Point direction;
  MorozovStatus status = MorozovStatus::Feasible;
  double alpha = 0.0;
  double delta = 0.0;
  double residual = 0.0;
  double norm = 0.0;          // ||psi||_{-1/2}
  double density_norm = std::numeric_limits<double>::quiet_NaN();
};

struct IndicatorPoint {
  Point y;
  int ix = 0;
  int iy = 0;
  double indicator = 0.0;
  double alpha = 0.0;  // alpha of the direction that set the indicator (Max), else mean
  bool feasible = false;
  double density_indicator = std::numeric_limits<double>::quiet_NaN();
  std::vector<DirectionOutcome> directions;
};

struct IndicatorMap {
  GridSpec grid;
  DirectionStrategy strategy = DirectionStrategy::Max;
  double epsilon = 0.0;
  std::vector<IndicatorPoint> points;
};

// Grid points (i s, j s) with |y| <= r_max, row-major from the lowest y.
std::vector<std::pair<int, int>> grid_indices(const GridSpec& grid);

IndicatorMap indicator_map(const RelativeData& data, const SingularTraceSolver& traces, const SweepOptions& options);
IndicatorMap indicator_map(const RelativeData& data, const DiskMesh& mesh, const SweepOptions& options);
// Evaluate at explicit points only.
IndicatorMap indicator_map_at(const RelativeData& data, const SingularTraceSolver& traces,
                              std::span<const Point> points, const SweepOptions& options);

struct SupportRule {
  enum class Kind { Multiplier, Quantile, AlphaMultiplier };
  Kind kind = Kind::Multiplier;
  double value = 75.0;  // calibrated at epsilon = 1e-2
};

struct SupportMask {
  std::vector<Point> points;
  std::vector<char> inside;
  double threshold = 0.0;
  std::size_t count() const;
};

// Multiplier: inside iff I(y) <= c min I. Quantile: inside iff I(y) <= the
// q-quantile of feasible I. AlphaMultiplier: inside iff alpha(y) >= max alpha / c.
// Infeasible points are never inside. Throws Estimation when nothing is feasible.
SupportMask estimate_support(const IndicatorMap& map, const SupportRule& rule = {});

void write_indicator_csv(std::ostream& out, const IndicatorMap& map);
void write_mask_csv(std::ostream& out, const SupportMask& mask);
// Binary PGM (P5) of -log I, brightest at the smallest indicator.
void write_indicator_pgm(std::ostream& out, const IndicatorMap& map);

} // namespace lsm

#endif
