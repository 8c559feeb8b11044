#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "cip/field.hh"

namespace cip {

// Corner I-patch: n bounding fields B_1..B_n, n corner interpolants S_{i,i+1}
// (with their scalar factors already merged in), side weights w_1..w_n and an
// interior weight w. Its value is
//
//   sum_i S_{i,i+1} prod_{j != i,i+1} B_j^2 + sum_i w_i prod_{j != i} B_j^2 + w prod_j B_j^2.
//
// Side and corner indices are 1-based and cyclic: corner i sits between bounds
// i and i+1, and index 0 means n, index n+1 means 1.
class CornerPatch : public Field {
public:
  CornerPatch(std::vector<FieldPtr> bounds, std::vector<FieldPtr> corners,
              std::vector<double> side_weights, double interior_weight);

  std::size_t sides() const { return bounds_.size(); }
  const Field &bound(std::ptrdiff_t i) const { return *bounds_[wrap(i)]; }
  const Field &corner(std::ptrdiff_t i) const { return *corners_[wrap(i)]; }
  const FieldPtr &bound_ptr(std::ptrdiff_t i) const { return bounds_[wrap(i)]; }
  const FieldPtr &corner_ptr(std::ptrdiff_t i) const { return corners_[wrap(i)]; }
  double side_weight(std::ptrdiff_t i) const { return side_weights_[wrap(i)]; }
  const std::vector<double> &side_weights() const { return side_weights_; }
  double interior_weight() const { return interior_weight_; }

  CornerPatch with_side_weight(std::ptrdiff_t i, double w) const;
  CornerPatch with_interior_weight(double w) const;
  CornerPatch with_weights(std::vector<double> side_weights, double interior_weight) const;

  // The patch is linear in its weights: value = corner_sum + sum_i w_i side_basis[i] + w interior_basis.
  struct Terms {
    double corner_sum = 0;
    std::vector<double> side_basis;
    double interior_basis = 0;
  };
  Terms terms(const Point3 &p) const;

  double value(const Point3 &p) const override;
  Vec3 gradient(const Point3 &p) const override;
  std::optional<int> degree() const override;

  // 0-based slot of a 1-based cyclic index.
  std::size_t wrap(std::ptrdiff_t i) const;

private:
  std::vector<FieldPtr> bounds_, corners_;
  std::vector<double> side_weights_;
  double interior_weight_;
};

// Side-based I-patch: sum_i w_i R_i prod_{j != i} B_j^k + w0 prod_j B_j^k.
class SideIPatch : public Field {
public:
  SideIPatch(std::vector<FieldPtr> ribbons, std::vector<FieldPtr> bounds,
             std::vector<double> weights, double w0, int k = 2);

  std::size_t sides() const { return bounds_.size(); }
  const std::vector<FieldPtr> &ribbons() const { return ribbons_; }
  const std::vector<FieldPtr> &bounds() const { return bounds_; }
  const std::vector<double> &weights() const { return weights_; }
  double w0() const { return w0_; }
  int exponent() const { return k_; }

  double value(const Point3 &p) const override;
  Vec3 gradient(const Point3 &p) const override;
  std::optional<int> degree() const override;

private:
  std::vector<FieldPtr> ribbons_, bounds_;
  std::vector<double> weights_;
  double w0_;
  int k_;
};

double corner_patch_eval(const CornerPatch &patch, const Point3 &p);
Vec3 corner_patch_gradient(const CornerPatch &patch, const Point3 &p);
double side_ipatch_eval(const SideIPatch &patch, const Point3 &p);

// The 2-sided I-patch the corner patch meets along bound i:
// S_{i-1,i} B_{i+1}^2 + S_{i,i+1} B_{i-1}^2 + w_i B_{i-1}^2 B_{i+1}^2.
std::shared_ptr<const SideIPatch> boundary_side_field(const CornerPatch &patch, std::ptrdiff_t side);

// The side-based I-patch (k = 2, unit weights, w0 = interior weight) whose
// ribbons are the n boundary side fields. Built by direct substitution.
std::shared_ptr<const SideIPatch> ribbon_ipatch_expand(const CornerPatch &patch);

struct CornerGradient {
  double lambda = 0;      // grad patch ~ lambda * grad S_{i,i+1}
  double angle = 0;       // radians between the two gradients
  bool degenerate = false; // another bound vanishes at the corner too
};

// Throws InvalidArgument when p is not on the corner (tolerance 1e-9) or
// when grad S_{i,i+1} is (nearly) zero.
CornerGradient corner_gradient_ratio(const CornerPatch &patch, std::ptrdiff_t corner, const Point3 &p);

// Newton iteration on B_i = B_{i+1} = S_{i,i+1} = 0.
std::optional<Point3> find_corner_point(const CornerPatch &patch, std::ptrdiff_t corner,
                                        const Point3 &start, int max_iterations = 50);

// Throws InvalidArgument if two bounds, or a corner and one of its two
// adjacent bounds, are scalar multiples of each other on deterministic
// sample points inside the box.
void validate_distinct(const CornerPatch &patch, const Box &box, int samples = 10, double tol = 1e-9);

// |Delta^order f| / max |f| over order+1 equispaced samples of f(origin + t dir),
// t in [-half_span, half_span].
double forward_difference_residual(const Field &field, const Point3 &origin, const Vec3 &dir,
                                   int order, double half_span = 1);

// Smallest d <= max_degree such that order d+1 differences vanish (relative
// residual <= tol); max_degree + 1 if none does.
int line_degree(const Field &field, const Point3 &origin, const Vec3 &dir, int max_degree,
                double tol = 1e-6, double half_span = 1);

double angle_between(const Vec3 &a, const Vec3 &b);

} // namespace cip
