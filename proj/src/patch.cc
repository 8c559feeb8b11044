#include "cip/patch.hh"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "cip/errors.hh"

namespace cip {

namespace {

constexpr double kOnSurfaceTol = 1e-9;

// Running product of b_j^2 over all j except skip_a/skip_b, with its gradient
// accumulated by the product rule so zeros need no division.
void squared_product(const std::vector<double> &b, const std::vector<Vec3> &grad_b,
                     std::size_t skip_a, std::size_t skip_b, double &product, Vec3 &grad) {
  product = 1;
  grad.setZero();
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (j == skip_a || j == skip_b)
      continue;
    double sq = b[j] * b[j];
    grad = grad * sq + product * (2 * b[j]) * grad_b[j];
    product *= sq;
  }
}

double squared_product(const std::vector<double> &b, std::size_t skip_a, std::size_t skip_b) {
  double product = 1;
  for (std::size_t j = 0; j < b.size(); ++j)
    if (j != skip_a && j != skip_b)
      product *= b[j] * b[j];
  return product;
}

double power(double x, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i)
    r *= x;
  return r;
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

} // namespace

// CornerPatch

CornerPatch::CornerPatch(std::vector<FieldPtr> bounds, std::vector<FieldPtr> corners,
                         std::vector<double> side_weights, double interior_weight)
  : bounds_(std::move(bounds)), corners_(std::move(corners)),
    side_weights_(std::move(side_weights)), interior_weight_(interior_weight) {
  if (bounds_.size() < 3)
    throw InvalidArgument("a corner patch needs at least 3 sides");
  if (corners_.size() != bounds_.size() || side_weights_.size() != bounds_.size())
    throw InvalidArgument("corner patch needs as many corners and side weights as bounds");
  for (std::size_t i = 0; i < bounds_.size(); ++i)
    if (!bounds_[i] || !corners_[i])
      throw InvalidArgument("corner patch constituent is null");
}

std::size_t CornerPatch::wrap(std::ptrdiff_t i) const {
  auto n = static_cast<std::ptrdiff_t>(bounds_.size());
  return static_cast<std::size_t>((((i - 1) % n) + n) % n);
}

CornerPatch CornerPatch::with_side_weight(std::ptrdiff_t i, double w) const {
  CornerPatch result = *this;
  result.side_weights_[wrap(i)] = w;
  return result;
}

CornerPatch CornerPatch::with_interior_weight(double w) const {
  CornerPatch result = *this;
  result.interior_weight_ = w;
  return result;
}

CornerPatch CornerPatch::with_weights(std::vector<double> side_weights, double interior_weight) const {
  return CornerPatch(bounds_, corners_, std::move(side_weights), interior_weight);
}

CornerPatch::Terms CornerPatch::terms(const Point3 &p) const {
  std::size_t n = sides();
  std::vector<double> b(n);
  for (std::size_t j = 0; j < n; ++j)
    b[j] = bounds_[j]->value(p);

  Terms t;
  for (std::size_t i = 0; i < n; ++i)
    t.corner_sum += corners_[i]->value(p) * squared_product(b, i, (i + 1) % n);
  t.side_basis.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    t.side_basis[i] = squared_product(b, i, kNone);
  t.interior_basis = squared_product(b, kNone, kNone);
  return t;
}

double CornerPatch::value(const Point3 &p) const {
  Terms t = terms(p);
  double sum = t.corner_sum;
  for (std::size_t i = 0; i < sides(); ++i)
    sum += side_weights_[i] * t.side_basis[i];
  sum += interior_weight_ * t.interior_basis;
  return sum;
}

Vec3 CornerPatch::gradient(const Point3 &p) const {
  std::size_t n = sides();
  std::vector<double> b(n);
  std::vector<Vec3> gb(n);
  for (std::size_t j = 0; j < n; ++j) {
    b[j] = bounds_[j]->value(p);
    gb[j] = bounds_[j]->gradient(p);
  }

  Vec3 grad = Vec3::Zero();
  double product;
  Vec3 grad_product;
  for (std::size_t i = 0; i < n; ++i) {
    squared_product(b, gb, i, (i + 1) % n, product, grad_product);
    grad += corners_[i]->gradient(p) * product + corners_[i]->value(p) * grad_product;
  }
  for (std::size_t i = 0; i < n; ++i) {
    squared_product(b, gb, i, kNone, product, grad_product);
    grad += side_weights_[i] * grad_product;
  }
  squared_product(b, gb, kNone, kNone, product, grad_product);
  grad += interior_weight_ * grad_product;
  return grad;
}

std::optional<int> CornerPatch::degree() const {
  std::size_t n = sides();
  std::vector<int> db(n), ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto b = bounds_[i]->degree(), s = corners_[i]->degree();
    if (!b || !s)
      return std::nullopt;
    db[i] = *b;
    ds[i] = *s;
  }
  int total = 0;
  for (int d : db)
    total += 2 * d;
  int result = total;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t next = (i + 1) % n;
    result = std::max(result, ds[i] + total - 2 * db[i] - 2 * db[next]);
  }
  return result;
}

// SideIPatch

SideIPatch::SideIPatch(std::vector<FieldPtr> ribbons, std::vector<FieldPtr> bounds,
                       std::vector<double> weights, double w0, int k)
  : ribbons_(std::move(ribbons)), bounds_(std::move(bounds)), weights_(std::move(weights)),
    w0_(w0), k_(k) {
  if (bounds_.size() < 2)
    throw InvalidArgument("an I-patch needs at least 2 sides");
  if (ribbons_.size() != bounds_.size() || weights_.size() != bounds_.size())
    throw InvalidArgument("I-patch needs as many ribbons and weights as bounds");
  if (k_ < 2)
    throw InvalidArgument("I-patch exponent must be at least 2");
  for (double w : weights_)
    if (w == 0)
      throw InvalidArgument("I-patch side weights must be nonzero");
  for (std::size_t i = 0; i < bounds_.size(); ++i)
    if (!bounds_[i] || !ribbons_[i])
      throw InvalidArgument("I-patch constituent is null");
}

double SideIPatch::value(const Point3 &p) const {
  std::size_t n = sides();
  std::vector<double> bk(n);
  for (std::size_t j = 0; j < n; ++j)
    bk[j] = power(bounds_[j]->value(p), k_);

  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double product = 1;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        product *= bk[j];
    sum += weights_[i] * ribbons_[i]->value(p) * product;
  }
  double all = 1;
  for (double v : bk)
    all *= v;
  return sum + w0_ * all;
}

Vec3 SideIPatch::gradient(const Point3 &p) const {
  std::size_t n = sides();
  std::vector<double> bk(n);
  std::vector<Vec3> gbk(n);
  for (std::size_t j = 0; j < n; ++j) {
    double b = bounds_[j]->value(p);
    bk[j] = power(b, k_);
    gbk[j] = k_ * power(b, k_ - 1) * bounds_[j]->gradient(p);
  }

  auto accumulate = [&](std::size_t skip, double &product, Vec3 &grad) {
    product = 1;
    grad.setZero();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == skip)
        continue;
      grad = grad * bk[j] + product * gbk[j];
      product *= bk[j];
    }
  };

  Vec3 grad = Vec3::Zero();
  double product;
  Vec3 grad_product;
  for (std::size_t i = 0; i < n; ++i) {
    accumulate(i, product, grad_product);
    grad += weights_[i] * (ribbons_[i]->gradient(p) * product + ribbons_[i]->value(p) * grad_product);
  }
  accumulate(kNone, product, grad_product);
  grad += w0_ * grad_product;
  return grad;
}

std::optional<int> SideIPatch::degree() const {
  std::size_t n = sides();
  int total = 0;
  std::vector<int> db(n), dr(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto b = bounds_[i]->degree(), r = ribbons_[i]->degree();
    if (!b || !r)
      return std::nullopt;
    db[i] = *b;
    dr[i] = *r;
    total += k_ * *b;
  }
  int result = total;
  for (std::size_t i = 0; i < n; ++i)
    result = std::max(result, dr[i] + total - k_ * db[i]);
  return result;
}

// Free functions

double corner_patch_eval(const CornerPatch &patch, const Point3 &p) { return patch.value(p); }

Vec3 corner_patch_gradient(const CornerPatch &patch, const Point3 &p) { return patch.gradient(p); }

double side_ipatch_eval(const SideIPatch &patch, const Point3 &p) { return patch.value(p); }

std::shared_ptr<const SideIPatch> boundary_side_field(const CornerPatch &patch, std::ptrdiff_t side) {
  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  if (side < 1 || side > n)
    throw InvalidArgument("side index out of range");
  return std::make_shared<SideIPatch>(
    std::vector<FieldPtr>{patch.corner_ptr(side - 1), patch.corner_ptr(side)},
    std::vector<FieldPtr>{patch.bound_ptr(side - 1), patch.bound_ptr(side + 1)},
    std::vector<double>{1.0, 1.0}, patch.side_weight(side), 2);
}

std::shared_ptr<const SideIPatch> ribbon_ipatch_expand(const CornerPatch &patch) {
  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  std::vector<FieldPtr> ribbons, bounds;
  for (std::ptrdiff_t i = 1; i <= n; ++i) {
    ribbons.push_back(boundary_side_field(patch, i));
    bounds.push_back(patch.bound_ptr(i));
  }
  return std::make_shared<SideIPatch>(std::move(ribbons), std::move(bounds),
                                      std::vector<double>(static_cast<std::size_t>(n), 1.0),
                                      patch.interior_weight(), 2);
}

double angle_between(const Vec3 &a, const Vec3 &b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

CornerGradient corner_gradient_ratio(const CornerPatch &patch, std::ptrdiff_t corner, const Point3 &p) {
  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  if (corner < 1 || corner > n)
    throw InvalidArgument("corner index out of range");
  if (std::abs(patch.bound(corner).value(p)) > kOnSurfaceTol ||
      std::abs(patch.bound(corner + 1).value(p)) > kOnSurfaceTol ||
      std::abs(patch.corner(corner).value(p)) > kOnSurfaceTol)
    throw InvalidArgument("point is not on the corner");
  Vec3 gs = patch.corner(corner).gradient(p);
  if (gs.norm() < 1e-9)
    throw InvalidArgument("corner interpolant gradient vanishes");

  CornerGradient result;
  for (std::ptrdiff_t j = 1; j <= n; ++j)
    if (j != corner && j != corner % n + 1 && std::abs(patch.bound(j).value(p)) <= kOnSurfaceTol)
      result.degenerate = true;
  Vec3 gp = patch.gradient(p);
  result.lambda = gp.dot(gs) / gs.squaredNorm();
  result.angle = gp.norm() == 0 ? 0.0 : angle_between(gp, gs);
  return result;
}

std::optional<Point3> find_corner_point(const CornerPatch &patch, std::ptrdiff_t corner,
                                        const Point3 &start, int max_iterations) {
  const Field &b0 = patch.bound(corner), &b1 = patch.bound(corner + 1), &s = patch.corner(corner);
  Point3 p = start;
  for (int it = 0; it < max_iterations; ++it) {
    Vec3 f(b0.value(p), b1.value(p), s.value(p));
    if (f.cwiseAbs().maxCoeff() <= 1e-15)
      return p;
    Eigen::Matrix3d jac;
    jac.row(0) = b0.gradient(p).transpose();
    jac.row(1) = b1.gradient(p).transpose();
    jac.row(2) = s.gradient(p).transpose();
    Eigen::FullPivLU<Eigen::Matrix3d> lu(jac);
    if (!lu.isInvertible())
      return std::nullopt;
    Vec3 step = lu.solve(f);
    p -= step;
    if (step.norm() <= 1e-16 * (1 + p.norm()))
      break;
  }
  Vec3 f(b0.value(p), b1.value(p), s.value(p));
  if (f.cwiseAbs().maxCoeff() > 1e-12)
    return std::nullopt;
  return p;
}

void validate_distinct(const CornerPatch &patch, const Box &box, int samples, double tol) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<Point3> points;
  for (int k = 0; k < samples; ++k) {
    Vec3 t(unit(rng), unit(rng), unit(rng));
    points.push_back(box.min + t.cwiseProduct(box.extent()));
  }
  auto sample = [&](const Field &f) {
    Eigen::VectorXd v(samples);
    for (int k = 0; k < samples; ++k)
      v[k] = f.value(points[static_cast<std::size_t>(k)]);
    return v;
  };
  auto proportional = [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0 || nb == 0)
      return true;
    Eigen::VectorXd r = a - (a.dot(b) / b.squaredNorm()) * b;
    return r.norm() <= tol * na;
  };

  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  std::vector<Eigen::VectorXd> bounds;
  for (std::ptrdiff_t i = 1; i <= n; ++i)
    bounds.push_back(sample(patch.bound(i)));
  for (std::size_t i = 0; i < bounds.size(); ++i)
    for (std::size_t j = i + 1; j < bounds.size(); ++j)
      if (proportional(bounds[i], bounds[j]))
        throw InvalidArgument("bounds " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                              " coincide");
  for (std::ptrdiff_t i = 1; i <= n; ++i) {
    Eigen::VectorXd s = sample(patch.corner(i));
    if (proportional(s, bounds[patch.wrap(i)]) || proportional(s, bounds[patch.wrap(i + 1)]))
      throw InvalidArgument("corner " + std::to_string(i) + " coincides with an adjacent bound");
  }
}

double forward_difference_residual(const Field &field, const Point3 &origin, const Vec3 &dir,
                                   int order, double half_span) {
  if (order < 1)
    throw InvalidArgument("difference order must be positive");
  double diff = 0, largest = 0, binom = 1;
  for (int k = 0; k <= order; ++k) {
    double t = -half_span + 2 * half_span * k / order;
    double f = field.value(origin + t * dir);
    largest = std::max(largest, std::abs(f));
    diff += ((order - k) % 2 == 0 ? binom : -binom) * f;
    binom = binom * (order - k) / (k + 1);
  }
  return largest == 0 ? 0.0 : std::abs(diff) / largest;
}

int line_degree(const Field &field, const Point3 &origin, const Vec3 &dir, int max_degree,
                double tol, double half_span) {
  for (int d = 0; d <= max_degree; ++d)
    if (forward_difference_residual(field, origin, dir, d + 1, half_span) <= tol)
      return d;
  return max_degree + 1;
}

} // namespace cip
