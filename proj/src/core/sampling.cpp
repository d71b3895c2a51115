#include "lsm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <Eigen/SVD>

#include "lsm/error.hpp"
#include "parallel.hpp"

namespace lsm {

SpectralSolver::SpectralSolver(const CMatrix& op) : rows_(op.rows()) {
  Eigen::JacobiSVD<CMatrix> svd(op, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u_ = svd.matrixU();
  sigma_ = svd.singularValues();
  v_ = svd.matrixV();
  const double smax = sigma_.size() ? sigma_[0] : 0.0;
  rank_tol_ = static_cast<double>(std::max(op.rows(), op.cols())) * std::numeric_limits<double>::epsilon() * smax;
}

SpectralSolver::Projection SpectralSolver::project(const CVector& rhs) const {
  if (rhs.size() != rows_) fail(ErrorCode::Dimension, "SpectralSolver: rhs size mismatch");
  Projection p;
  p.beta = u_.adjoint() * rhs;
  p.norm = rhs.norm();
  p.out_of_range_sq = std::max(0.0, rhs.squaredNorm() - p.beta.squaredNorm());
  return p;
}

CVector SpectralSolver::solve(const Projection& p, double alpha) const {
  CVector coef = CVector::Zero(sigma_.size());
  for (Eigen::Index k = 0; k < sigma_.size(); ++k) {
    const double s = sigma_[k];
    if (s <= rank_tol_) continue;
    coef[k] = p.beta[k] * (s / (s * s + alpha));
  }
  return v_ * coef;
}

double SpectralSolver::residual(const Projection& p, double alpha) const {
  double sum = p.out_of_range_sq;
  for (Eigen::Index k = 0; k < sigma_.size(); ++k) {
    const double s = sigma_[k];
    const double f = s <= rank_tol_ ? 1.0 : alpha / (s * s + alpha);
    sum += f * f * std::norm(p.beta[k]);
  }
  return std::sqrt(sum);
}

double SpectralSolver::solution_norm(const Projection& p, double alpha) const {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < sigma_.size(); ++k) {
    const double s = sigma_[k];
    if (s <= rank_tol_) continue;
    const double f = s / (s * s + alpha);
    sum += f * f * std::norm(p.beta[k]);
  }
  return std::sqrt(sum);
}

double SpectralSolver::min_residual(const Projection& p) const { return residual(p, 0.0); }

const char* to_string(MorozovStatus s) {
  switch (s) {
    case MorozovStatus::Feasible: return "feasible";
    case MorozovStatus::InfeasibleLow: return "infeasible-low";
    case MorozovStatus::InfeasibleHigh: return "infeasible-high";
  }
  return "?";
}

MorozovResult morozov(const SpectralSolver& solver, const CVector& rhs, double delta) {
  if (!(delta > 0.0)) fail(ErrorCode::InvalidArgument, "morozov: delta must be positive");
  const SpectralSolver::Projection p = solver.project(rhs);
  MorozovResult r;
  r.delta = delta;
  r.rhs_norm = p.norm;
  r.min_residual = solver.min_residual(p);

  if (delta >= p.norm) {
    r.status = MorozovStatus::InfeasibleHigh;
    r.alpha = std::numeric_limits<double>::infinity();
    r.solution = CVector::Zero(solver.cols());
    r.residual = p.norm;
    return r;
  }
  if (delta <= r.min_residual) {
    r.status = MorozovStatus::InfeasibleLow;
    r.alpha = 0.0;
    r.solution = solver.solve(p, 0.0);
    r.residual = r.min_residual;
    return r;
  }

  const double smax = solver.singular_values()[0];
  const double step = std::log(100.0);
  double t_hi = 2.0 * std::log(smax);
  double t_lo = t_hi;
  for (int i = 0; i < 400 && solver.residual(p, std::exp(t_hi)) < delta; ++i) t_hi += step;
  for (int i = 0; i < 400 && solver.residual(p, std::exp(t_lo)) > delta; ++i) {
    t_lo -= step;
    if (std::exp(t_lo) == 0.0) {
      r.status = MorozovStatus::InfeasibleLow;
      r.solution = solver.solve(p, 0.0);
      r.residual = r.min_residual;
      return r;
    }
  }

  double best_t = t_hi;
  double best_gap = std::abs(solver.residual(p, std::exp(t_hi)) - delta);
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (t_lo + t_hi);
    const double res = solver.residual(p, std::exp(mid));
    const double gap = std::abs(res - delta);
    if (gap < best_gap) {
      best_gap = gap;
      best_t = mid;
    }
    if (gap <= 1e-12 * delta || t_hi - t_lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
    if (res > delta) t_hi = mid;
    else t_lo = mid;
  }
  r.status = MorozovStatus::Feasible;
  r.alpha = std::exp(best_t);
  r.solution = solver.solve(p, r.alpha);
  r.residual = solver.residual(p, r.alpha);
  return r;
}

// ---------------------------------------------------------------------------

RelativeData::RelativeData(const NdMap& measured, const NdMap& background) : order_(measured.order) {
  if (measured.order != background.order || measured.matrix.rows() != background.matrix.rows() ||
      measured.matrix.cols() != background.matrix.cols()) {
    fail(ErrorCode::Dimension, "make_relative_data: measured and background maps differ in order");
  }
  difference_ = measured.matrix - background.matrix;
  w_half_ = sobolev_weights(order_, 0.5);
  weighted_ = w_half_.asDiagonal() * difference_ * w_half_.asDiagonal();
  solver_ = SpectralSolver(weighted_);
}

CVector RelativeData::weigh_rhs(const BoundaryField& rhs) const {
  if (rhs.order() != order_) fail(ErrorCode::Dimension, "right-hand side order does not match the data");
  return w_half_.asDiagonal() * rhs.coeffs();
}

BoundaryField RelativeData::unweigh_solution(const CVector& weighted) const {
  return BoundaryField(CVector(w_half_.asDiagonal() * weighted), -0.5);
}

BoundaryField tikhonov_solve(const RelativeData& data, const BoundaryField& rhs, double alpha) {
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "tikhonov_solve: alpha must be positive");
  const auto p = data.solver().project(data.weigh_rhs(rhs));
  return data.unweigh_solution(data.solver().solve(p, alpha));
}

double tikhonov_residual(const RelativeData& data, const BoundaryField& rhs, double alpha) {
  const auto p = data.solver().project(data.weigh_rhs(rhs));
  return data.solver().residual(p, alpha);
}

MorozovSolution morozov_alpha(const RelativeData& data, const BoundaryField& rhs, double delta) {
  MorozovSolution s;
  s.result = morozov(data.solver(), data.weigh_rhs(rhs), delta);
  s.psi = data.unweigh_solution(s.result.solution);
  return s;
}

// ---------------------------------------------------------------------------

DensityProblem::DensityProblem(const RelativeData& data, const AuxCircle& aux)
    : data_(&data), aux_(aux), layer_(layer_operator_fourier(aux, data.order())) {
  const CMatrix op = data.half_weights().asDiagonal() * data.difference() * layer_ / std::sqrt(aux_.weight());
  solver_ = SpectralSolver(op);
}

DensityProblem::Solution DensityProblem::finish(const CVector& scaled, double residual) const {
  Solution s;
  s.density = scaled / std::sqrt(aux_.weight());
  s.psi = apply_layer(layer_, s.density);
  s.residual = residual;
  s.density_norm = scaled.norm();
  return s;
}

DensityProblem::Solution DensityProblem::solve(const BoundaryField& rhs, double alpha) const {
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "reconstruct_via_density: alpha must be positive");
  const auto p = solver_.project(data_->weigh_rhs(rhs));
  Solution s = finish(solver_.solve(p, alpha), solver_.residual(p, alpha));
  s.alpha = alpha;
  return s;
}

DensityProblem::Solution DensityProblem::solve_morozov(const BoundaryField& rhs, double delta) const {
  const MorozovResult r = morozov(solver_, data_->weigh_rhs(rhs), delta);
  Solution s = finish(r.solution, r.residual);
  s.status = r.status;
  s.alpha = r.alpha;
  return s;
}

DensityProblem::Solution reconstruct_via_density(const RelativeData& data, const AuxCircle& aux,
                                                 const BoundaryField& rhs, double alpha) {
  return DensityProblem(data, aux).solve(rhs, alpha);
}

// ---------------------------------------------------------------------------

const char* to_string(DirectionStrategy s) {
  switch (s) {
    case DirectionStrategy::Max: return "max";
    case DirectionStrategy::Mean: return "mean";
    case DirectionStrategy::X: return "x";
    case DirectionStrategy::Y: return "y";
  }
  return "?";
}

DirectionStrategy parse_direction_strategy(const std::string& name) {
  if (name == "max") return DirectionStrategy::Max;
  if (name == "mean") return DirectionStrategy::Mean;
  if (name == "x") return DirectionStrategy::X;
  if (name == "y") return DirectionStrategy::Y;
  fail(ErrorCode::Configuration, "unknown direction strategy '" + name + "' (expected max, mean, x or y)");
}

std::vector<std::pair<int, int>> grid_indices(const GridSpec& grid) {
  if (!(grid.spacing > 0.0)) fail(ErrorCode::Configuration, "grid spacing must be positive");
  if (!(grid.r_max >= 0.0 && grid.r_max <= 0.9)) fail(ErrorCode::Configuration, "grid r_max must lie in [0, 0.9]");
  const int reach = static_cast<int>(std::floor(grid.r_max / grid.spacing + 1e-9));
  std::vector<std::pair<int, int>> out;
  for (int iy = -reach; iy <= reach; ++iy) {
    for (int ix = -reach; ix <= reach; ++ix) {
      if (std::hypot(ix * grid.spacing, iy * grid.spacing) <= grid.r_max + 1e-12) out.emplace_back(ix, iy);
    }
  }
  return out;
}

namespace {

std::vector<Point> strategy_directions(DirectionStrategy s) {
  switch (s) {
    case DirectionStrategy::X: return {Point::UnitX()};
    case DirectionStrategy::Y: return {Point::UnitY()};
    default: return {Point::UnitX(), Point::UnitY()};
  }
}

void evaluate_point(IndicatorPoint& pt, const RelativeData& data, const SingularTraceSolver& traces,
                    const SweepOptions& options, const DensityProblem* density) {
  const auto dirs = strategy_directions(options.directions);
  pt.directions.clear();
  pt.feasible = true;
  for (const Point& d : dirs) {
    const BoundaryField phi = traces.trace(DipoleSpec(pt.y, d), data.order());
    const double delta = options.epsilon * phi.norm();
    const MorozovSolution sol = morozov_alpha(data, phi, delta);
    DirectionOutcome out;
    out.direction = d;
    out.status = sol.result.status;
    out.alpha = sol.result.alpha;
    out.delta = delta;
    out.residual = sol.result.residual;
    out.norm = sol.psi.norm();
    if (density) out.density_norm = density->solve_morozov(phi, delta).density_norm;
    pt.feasible = pt.feasible && sol.result.feasible();
    pt.directions.push_back(out);
  }
  if (options.directions == DirectionStrategy::Mean) {
    pt.indicator = 0.0;
    pt.alpha = 0.0;
    pt.density_indicator = 0.0;
    for (const auto& o : pt.directions) {
      pt.indicator += o.norm / pt.directions.size();
      pt.alpha += o.alpha / pt.directions.size();
      pt.density_indicator += o.density_norm / pt.directions.size();
    }
  } else {
    const auto best = std::max_element(pt.directions.begin(), pt.directions.end(),
                                       [](const auto& a, const auto& b) { return a.norm < b.norm; });
    pt.indicator = best->norm;
    pt.alpha = best->alpha;
    pt.density_indicator = -std::numeric_limits<double>::infinity();
    for (const auto& o : pt.directions) pt.density_indicator = std::max(pt.density_indicator, o.density_norm);
  }
  if (!density) pt.density_indicator = std::numeric_limits<double>::quiet_NaN();
}

void check_options(const SweepOptions& options) {
  if (!(options.epsilon > 0.0)) fail(ErrorCode::Configuration, "delta rule epsilon must be positive");
  if (!(options.grid.r_max <= 0.9)) fail(ErrorCode::Configuration, "grid r_max must not exceed 0.9");
}

IndicatorMap sweep(const RelativeData& data, const SingularTraceSolver& traces, std::vector<IndicatorPoint> points,
                   const SweepOptions& options) {
  check_options(options);
  std::optional<DensityProblem> density;
  if (options.density) density.emplace(data, *options.density);
  detail::parallel_for(points.size(), options.threads, [&](std::size_t i) {
    evaluate_point(points[i], data, traces, options, density ? &*density : nullptr);
  });
  IndicatorMap map;
  map.grid = options.grid;
  map.strategy = options.directions;
  map.epsilon = options.epsilon;
  map.points = std::move(points);
  return map;
}

} // namespace

IndicatorMap indicator_map(const RelativeData& data, const SingularTraceSolver& traces, const SweepOptions& options) {
  std::vector<IndicatorPoint> points;
  for (const auto& [ix, iy] : grid_indices(options.grid)) {
    IndicatorPoint p;
    p.ix = ix;
    p.iy = iy;
    p.y = Point(ix * options.grid.spacing, iy * options.grid.spacing);
    points.push_back(p);
  }
  return sweep(data, traces, std::move(points), options);
}

IndicatorMap indicator_map(const RelativeData& data, const DiskMesh& mesh, const SweepOptions& options) {
  const SingularTraceSolver traces(mesh);
  return indicator_map(data, traces, options);
}

IndicatorMap indicator_map_at(const RelativeData& data, const SingularTraceSolver& traces,
                              std::span<const Point> where, const SweepOptions& options) {
  std::vector<IndicatorPoint> points;
  for (const Point& y : where) {
    if (!(y.norm() < 1.0)) fail(ErrorCode::Domain, "sampling point outside the unit disk");
    IndicatorPoint p;
    p.y = y;
    p.ix = static_cast<int>(std::lround(y.x() / options.grid.spacing));
    p.iy = static_cast<int>(std::lround(y.y() / options.grid.spacing));
    points.push_back(p);
  }
  return sweep(data, traces, std::move(points), options);
}

// ---------------------------------------------------------------------------

std::size_t SupportMask::count() const { return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), 1)); }

SupportMask estimate_support(const IndicatorMap& map, const SupportRule& rule) {
  std::vector<double> values;
  std::vector<double> alphas;
  for (const auto& p : map.points) {
    if (!p.feasible) continue;
    values.push_back(p.indicator);
    alphas.push_back(p.alpha);
  }
  if (values.empty()) fail(ErrorCode::Estimation, "estimate_support: no feasible sampling point");

  SupportMask mask;
  mask.points.reserve(map.points.size());
  for (const auto& p : map.points) mask.points.push_back(p.y);
  mask.inside.assign(map.points.size(), 0);

  switch (rule.kind) {
    case SupportRule::Kind::Multiplier: {
      if (!(rule.value >= 1.0)) fail(ErrorCode::Configuration, "cut-off multiplier must be >= 1");
      mask.threshold = rule.value * *std::min_element(values.begin(), values.end());
      for (std::size_t i = 0; i < map.points.size(); ++i) {
        mask.inside[i] = map.points[i].feasible && map.points[i].indicator <= mask.threshold;
      }
      break;
    }
    case SupportRule::Kind::Quantile: {
      if (!(rule.value > 0.0 && rule.value <= 1.0)) fail(ErrorCode::Configuration, "cut-off quantile must lie in (0, 1]");
      std::sort(values.begin(), values.end());
      const auto rank = static_cast<std::size_t>(std::ceil(rule.value * values.size()));
      mask.threshold = values[std::max<std::size_t>(rank, 1) - 1];
      for (std::size_t i = 0; i < map.points.size(); ++i) {
        mask.inside[i] = map.points[i].feasible && map.points[i].indicator <= mask.threshold;
      }
      break;
    }
    case SupportRule::Kind::AlphaMultiplier: {
      if (!(rule.value >= 1.0)) fail(ErrorCode::Configuration, "cut-off multiplier must be >= 1");
      mask.threshold = *std::max_element(alphas.begin(), alphas.end()) / rule.value;
      for (std::size_t i = 0; i < map.points.size(); ++i) {
        mask.inside[i] = map.points[i].feasible && map.points[i].alpha >= mask.threshold;
      }
      break;
    }
  }
  return mask;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void write_indicator_csv(std::ostream& out, const IndicatorMap& map) {
  out << "x,y,indicator,alpha,feasible\n";
  for (const auto& p : map.points) {
    out << fmt(p.y.x()) << ',' << fmt(p.y.y()) << ',' << fmt(p.indicator) << ',' << fmt(p.alpha) << ','
        << (p.feasible ? 1 : 0) << '\n';
  }
}

void write_mask_csv(std::ostream& out, const SupportMask& mask) {
  out << "x,y,inside\n";
  for (std::size_t i = 0; i < mask.points.size(); ++i) {
    out << fmt(mask.points[i].x()) << ',' << fmt(mask.points[i].y()) << ',' << (mask.inside[i] ? 1 : 0) << '\n';
  }
}

void write_indicator_pgm(std::ostream& out, const IndicatorMap& map) {
  const int reach = static_cast<int>(std::floor(map.grid.r_max / map.grid.spacing + 1e-9));
  int lo_x = -reach, hi_x = reach, lo_y = -reach, hi_y = reach;
  for (const auto& p : map.points) {
    lo_x = std::min(lo_x, p.ix);
    hi_x = std::max(hi_x, p.ix);
    lo_y = std::min(lo_y, p.iy);
    hi_y = std::max(hi_y, p.iy);
  }
  const int width = hi_x - lo_x + 1;
  const int height = hi_y - lo_y + 1;

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (const auto& p : map.points) {
    if (!p.feasible || !(p.indicator > 0.0)) continue;
    vmin = std::min(vmin, std::log(p.indicator));
    vmax = std::max(vmax, std::log(p.indicator));
  }
  std::vector<unsigned char> pixels(static_cast<std::size_t>(width) * height, 0);
  for (const auto& p : map.points) {
    if (!p.feasible || !(p.indicator > 0.0)) continue;
    const double v = std::log(p.indicator);
    const double t = vmax > vmin ? (vmax - v) / (vmax - vmin) : 1.0;
    const int row = hi_y - p.iy;
    const int col = p.ix - lo_x;
    pixels[static_cast<std::size_t>(row) * width + col] = static_cast<unsigned char>(1 + std::lround(254.0 * t));
  }
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

} // namespace lsm
