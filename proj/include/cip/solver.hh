#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cip/patch.hh"

namespace cip {

struct BoundaryTarget {
  std::ptrdiff_t side = 1; // 1-based
  Point3 point;
};

struct InterpolationSpec {
  std::vector<BoundaryTarget> boundary_targets;
  std::optional<Point3> interior_target;
};

// Moves p onto the zero set of the bound by Newton projection along its
// gradient. Points farther than 1e-6 are rejected with SolverError.
Point3 snap_to_bound(const Field &bound, const Point3 &p);

// Side weight w_i making the patch pass through p (p on B_i). Only bounds and
// corners enter the formula, so the result is independent of every other weight.
double solve_side_weight(const CornerPatch &patch, std::ptrdiff_t side, const Point3 &p);

// Interior weight w making the patch pass through q, given the current side weights.
double solve_interior_weight(const CornerPatch &patch, const Point3 &q);

struct Interpolation {
  CornerPatch patch;
  std::vector<double> boundary_residuals; // |patch| at each (snapped) boundary target
  std::optional<double> interior_residual;
};

// Solves every listed side weight, then the interior weight. Sides without a
// target keep their weights; so does the interior weight without a target.
Interpolation interpolate(const CornerPatch &patch, const InterpolationSpec &spec);

struct LsqFit {
  std::vector<double> side_weights;
  double interior_weight = 0;
  double rms_residual = 0;      // algebraic residual at the fitted weights
  double rms_zero_weights = 0;  // same with all weights set to zero
};

// Minimizes sum_s patch(s)^2 over w_1..w_n, w with a column-pivoting QR of the
// column-scaled design matrix. Throws SolverError on too few samples or a
// rank-deficient design.
LsqFit fit_weights_lsq(const CornerPatch &patch, const std::vector<Point3> &samples);

} // namespace cip
