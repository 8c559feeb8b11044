#include "cip/solver.hh"

#include <cmath>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "cip/errors.hh"

namespace cip {

namespace {

constexpr double kSnapDistance = 1e-6;
constexpr double kOnBoundTol = 1e-9;
constexpr double kClearance = 1e-6;

} // namespace

Point3 snap_to_bound(const Field &bound, const Point3 &p) {
  Vec3 g = bound.gradient(p);
  double gn = g.norm();
  if (gn == 0)
    throw SolverError("bound gradient vanishes at the target");
  if (std::abs(bound.value(p)) / gn > kSnapDistance)
    throw SolverError("target is not on its bounding surface");
  Point3 q = p;
  for (int it = 0; it < 8 && bound.value(q) != 0; ++it) {
    double v = bound.value(q);
    Vec3 gq = bound.gradient(q);
    Point3 next = q - v * gq / gq.squaredNorm();
    if (std::abs(bound.value(next)) >= std::abs(v))
      break;
    q = next;
  }
  if (std::abs(bound.value(q)) > kOnBoundTol)
    throw SolverError("target could not be snapped onto its bounding surface");
  return q;
}

double solve_side_weight(const CornerPatch &patch, std::ptrdiff_t side, const Point3 &p) {
  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  if (side < 1 || side > n)
    throw InvalidArgument("side index out of range");
  Point3 q = snap_to_bound(patch.bound(side), p);
  double prev = patch.bound(side - 1).value(q), next = patch.bound(side + 1).value(q);
  if (std::abs(prev) < kClearance || std::abs(next) < kClearance)
    throw SolverError("degenerate target: lies on an adjacent bound of side " + std::to_string(side));
  double prev2 = prev * prev, next2 = next * next;
  double denominator = prev2 * next2;
  if (denominator < 1e-18)
    throw SolverError("degenerate target: vanishing denominator on side " + std::to_string(side));
  double numerator = patch.corner(side - 1).value(q) * next2 + patch.corner(side).value(q) * prev2;
  return -numerator / denominator;
}

double solve_interior_weight(const CornerPatch &patch, const Point3 &q) {
  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  for (std::ptrdiff_t j = 1; j <= n; ++j)
    if (std::abs(patch.bound(j).value(q)) < kClearance)
      throw SolverError("interior target lies on or near bound " + std::to_string(j));
  CornerPatch::Terms t = patch.terms(q);
  double without = t.corner_sum;
  for (std::size_t i = 0; i < patch.sides(); ++i)
    without += patch.side_weights()[i] * t.side_basis[i];
  if (!(t.interior_basis > 0))
    throw SolverError("interior basis vanishes at the target");
  return -without / t.interior_basis;
}

Interpolation interpolate(const CornerPatch &patch, const InterpolationSpec &spec) {
  std::set<std::ptrdiff_t> seen;
  std::vector<double> weights = patch.side_weights();
  std::vector<Point3> snapped;
  for (const auto &target : spec.boundary_targets) {
    if (!seen.insert(patch.wrap(target.side)).second || target.side < 1 ||
        target.side > static_cast<std::ptrdiff_t>(patch.sides()))
      throw InvalidArgument("boundary targets need distinct, in-range side indices");
    weights[patch.wrap(target.side)] = solve_side_weight(patch, target.side, target.point);
    snapped.push_back(snap_to_bound(patch.bound(target.side), target.point));
  }
  CornerPatch result = patch.with_weights(weights, patch.interior_weight());
  std::optional<double> interior_residual;
  if (spec.interior_target) {
    result = result.with_interior_weight(solve_interior_weight(result, *spec.interior_target));
    interior_residual = std::abs(result.value(*spec.interior_target));
  }
  std::vector<double> residuals;
  for (const auto &q : snapped)
    residuals.push_back(std::abs(result.value(q)));
  return {std::move(result), std::move(residuals), interior_residual};
}

LsqFit fit_weights_lsq(const CornerPatch &patch, const std::vector<Point3> &samples) {
  const auto n = static_cast<Eigen::Index>(patch.sides());
  const auto m = static_cast<Eigen::Index>(samples.size());
  if (m < n + 1)
    throw SolverError("need at least n+1 samples to fit n+1 weights");

  Eigen::MatrixXd design(m, n + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index s = 0; s < m; ++s) {
    CornerPatch::Terms t = patch.terms(samples[static_cast<std::size_t>(s)]);
    for (Eigen::Index i = 0; i < n; ++i)
      design(s, i) = t.side_basis[static_cast<std::size_t>(i)];
    design(s, n) = t.interior_basis;
    rhs[s] = -t.corner_sum;
  }

  Eigen::VectorXd scale = design.colwise().norm().transpose();
  if (scale.minCoeff() < 1e-12)
    throw SolverError("rank-deficient design: a weight has no effect on any sample");
  Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-12);
  if (qr.rank() < n + 1)
    throw SolverError("rank-deficient design: samples do not determine all weights");
  Eigen::VectorXd x = qr.solve(rhs).cwiseQuotient(scale);

  LsqFit fit;
  fit.side_weights.assign(x.data(), x.data() + n);
  fit.interior_weight = x[n];
  fit.rms_residual = std::sqrt((design * x - rhs).squaredNorm() / static_cast<double>(m));
  fit.rms_zero_weights = std::sqrt(rhs.squaredNorm() / static_cast<double>(m));
  return fit;
}

} // namespace cip
