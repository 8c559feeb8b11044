#include "cip/field.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cip/errors.hh"

namespace cip {

namespace {

double ipow(double x, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i)
    r *= x;
  return r;
}

} // namespace

Plane::Plane(const Vec3 &normal, double offset) {
  double len = normal.norm();
  if (!std::isfinite(len) || len < 1e-12)
    throw InvalidArgument("plane normal is zero or not finite");
  // Already-unit normals are kept bit for bit so descriptors reload exactly.
  if (std::abs(len - 1) <= 4 * std::numeric_limits<double>::epsilon())
    len = 1;
  normal_ = normal / len;
  offset_ = offset / len;
}

Plane Plane::through(const Point3 &point, const Vec3 &normal) {
  Plane result(normal, 0);
  result.offset_ = -result.normal_.dot(point);
  return result;
}

Plane Plane::flipped() const {
  Plane result;
  result.normal_ = -normal_;
  result.offset_ = -offset_;
  return result;
}

double Plane::value(const Point3 &p) const {
  return normal_.dot(p) + offset_;
}

PolyField::PolyField(std::vector<Monomial> terms) : terms_(std::move(terms)) {
  std::set<std::array<int, 3>> seen;
  for (const auto &t : terms_) {
    if (std::any_of(t.powers.begin(), t.powers.end(), [](int k) { return k < 0; }))
      throw InvalidArgument("negative exponent in polynomial term");
    if (!seen.insert(t.powers).second)
      throw InvalidArgument("duplicate exponent triple in polynomial");
  }
}

double PolyField::value(const Point3 &p) const {
  double sum = 0;
  for (const auto &t : terms_)
    sum += t.coef * ipow(p[0], t.powers[0]) * ipow(p[1], t.powers[1]) * ipow(p[2], t.powers[2]);
  return sum;
}

Vec3 PolyField::gradient(const Point3 &p) const {
  Vec3 g = Vec3::Zero();
  for (const auto &t : terms_) {
    std::array<double, 3> f;
    for (int a = 0; a < 3; ++a)
      f[a] = ipow(p[a], t.powers[a]);
    for (int a = 0; a < 3; ++a) {
      int k = t.powers[a];
      if (k == 0)
        continue;
      double d = t.coef * k * ipow(p[a], k - 1);
      for (int b = 0; b < 3; ++b)
        if (b != a)
          d *= f[b];
      g[a] += d;
    }
  }
  return g;
}

std::optional<int> PolyField::degree() const {
  int d = 0;
  for (const auto &t : terms_)
    if (t.coef != 0)
      d = std::max(d, t.powers[0] + t.powers[1] + t.powers[2]);
  return d;
}

SphereField::SphereField(const Point3 &center, double radius) : center_(center), radius_(radius) {
  if (!(radius > 0))
    throw InvalidArgument("sphere radius must be positive");
}

double SphereField::value(const Point3 &p) const {
  return (p - center_).norm() - radius_;
}

Vec3 SphereField::gradient(const Point3 &p) const {
  Vec3 d = p - center_;
  double len = d.norm();
  if (len == 0)
    return Vec3::Zero();
  return d / len;
}

double plane_eval(const Plane &plane, const Point3 &p) { return plane.value(p); }

double poly_eval(const PolyField &field, const Point3 &p) { return field.value(p); }

Vec3 fd_gradient(const Field &field, const Point3 &p, double h) {
  if (!(h > 0))
    throw InvalidArgument("finite-difference step must be positive");
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Point3 lo = p, hi = p;
    lo[a] -= h;
    hi[a] += h;
    g[a] = (field.value(hi) - field.value(lo)) / (2 * h);
  }
  return g;
}

FieldPtr make_plane(const Vec3 &normal, double offset) {
  return std::make_shared<Plane>(normal, offset);
}

FieldPtr make_poly(std::vector<Monomial> terms) {
  return std::make_shared<PolyField>(std::move(terms));
}

FieldPtr make_constant(double c) {
  return std::make_shared<PolyField>(std::vector<Monomial>{{c, {0, 0, 0}}});
}

} // namespace cip
