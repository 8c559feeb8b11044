#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace cip {

using Vec3 = Eigen::Vector3d;
using Point3 = Eigen::Vector3d;

struct Box {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Ones();

  Vec3 extent() const { return max - min; }
  double diagonal() const { return extent().norm(); }
  Point3 center() const { return (min + max) / 2; }
  bool contains(const Point3 &p, double tol = 0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
};

// A real function on 3D space with an analytic gradient.
// Implementations are immutable after construction.
class Field {
public:
  virtual ~Field() = default;
  virtual double value(const Point3 &p) const = 0;
  virtual Vec3 gradient(const Point3 &p) const = 0;
  // Total polynomial degree, if the field is a polynomial.
  virtual std::optional<int> degree() const { return std::nullopt; }
};

using FieldPtr = std::shared_ptr<const Field>;

// Oriented plane normal·p + offset with a unit normal, i.e. a signed distance.
class Plane : public Field {
public:
  // Normalizes (normal, offset) jointly so the zero set is preserved.
  Plane(const Vec3 &normal, double offset);
  static Plane through(const Point3 &point, const Vec3 &normal);

  const Vec3 &normal() const { return normal_; }
  double offset() const { return offset_; }
  Plane flipped() const;

  double value(const Point3 &p) const override;
  Vec3 gradient(const Point3 &) const override { return normal_; }
  std::optional<int> degree() const override { return 1; }

private:
  Plane() = default;
  Vec3 normal_;
  double offset_ = 0;
};

struct Monomial {
  double coef = 0;
  std::array<int, 3> powers{0, 0, 0};
};

// Trivariate polynomial in the monomial basis.
class PolyField : public Field {
public:
  PolyField() = default;
  explicit PolyField(std::vector<Monomial> terms);

  const std::vector<Monomial> &terms() const { return terms_; }

  double value(const Point3 &p) const override;
  Vec3 gradient(const Point3 &p) const override;
  std::optional<int> degree() const override;

private:
  std::vector<Monomial> terms_;
};

// Signed distance to a sphere: |p - center| - radius.
class SphereField : public Field {
public:
  SphereField(const Point3 &center, double radius);

  const Point3 &center() const { return center_; }
  double radius() const { return radius_; }

  double value(const Point3 &p) const override;
  Vec3 gradient(const Point3 &p) const override;

private:
  Point3 center_;
  double radius_;
};

double plane_eval(const Plane &plane, const Point3 &p);
double poly_eval(const PolyField &field, const Point3 &p);

// Central differences, (f(p + h e) - f(p - h e)) / 2h per axis.
Vec3 fd_gradient(const Field &field, const Point3 &p, double h = 1e-5);

// Convenience constructors for shared fields.
FieldPtr make_plane(const Vec3 &normal, double offset);
FieldPtr make_poly(std::vector<Monomial> terms);
FieldPtr make_constant(double c);

} // namespace cip
