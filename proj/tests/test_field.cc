#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cip/errors.hh"
#include "cip/field.hh"
#include "support/random_patch.hh"

using namespace cip;

TEST_CASE("plane evaluation is a dot product plus offset") {
  CHECK(plane_eval(Plane(Vec3(0, 0, 1), 0), Point3(0.3, 0.4, 0)) == 0);
  CHECK(plane_eval(Plane(Vec3(1, 0, 0), -0.5), Point3(1, 0, 0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(plane_eval(Plane(Vec3(0.6, 0.8, 0), 0.1), Point3(1, 1, 1)) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("planes are normalized jointly so the zero set is kept") {
  Plane p(Vec3(0, 0, 2), -1);
  CHECK(p.normal() == Vec3(0, 0, 1));
  CHECK(p.offset() == doctest::Approx(-0.5));
  CHECK(p.value(Point3(7, -3, 0.5)) == 0);
  CHECK(p.value(Point3(0, 0, 1.5)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(Plane(Vec3(0, 0, 0), 1), InvalidArgument);
  CHECK_THROWS_AS(Plane(Vec3(1e-14, 0, 0), 1), InvalidArgument);
}

TEST_CASE("unit normals survive normalization bit for bit") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    Vec3 n = testing::random_unit(rng);
    Plane a(n, 0.25);
    Plane b(a.normal(), a.offset());
    CHECK(a.normal() == b.normal());
    CHECK(a.offset() == b.offset());
  }
}

TEST_CASE("plane through a point and flipped plane") {
  Plane p = Plane::through(Point3(1, 2, 3), Vec3(0, 3, 4));
  CHECK(std::abs(p.value(Point3(1, 2, 3))) <= 1e-15);
  CHECK(p.value(Point3(1, 2.6, 3.8)) == doctest::Approx(1.0));
  Plane q = p.flipped();
  CHECK(q.normal() == -p.normal());
  CHECK(q.offset() == -p.offset());
}

TEST_CASE("finite differences recover gradients") {
  std::mt19937_64 rng(11);
  Plane plane(testing::random_unit(rng), 0.3);
  for (int k = 0; k < 10; ++k) {
    Point3 p = testing::random_point(rng, -2, 2);
    CHECK((fd_gradient(plane, p, 1e-5) - plane.normal()).norm() <= 1e-10);
  }
  auto c = make_constant(4.5);
  CHECK(fd_gradient(*c, Point3(1, 2, 3)).norm() == 0);
  PolyField r2({{1, {2, 0, 0}}, {1, {0, 2, 0}}, {1, {0, 0, 2}}});
  CHECK((fd_gradient(r2, Point3(1, 2, 3), 1e-5) - Vec3(2, 4, 6)).norm() <= 1e-8);
}

TEST_CASE("polynomial evaluation") {
  CHECK(poly_eval(PolyField(), Point3(1, 2, 3)) == 0);
  CHECK(poly_eval(PolyField(std::vector<Monomial>{{1, {1, 1, 1}}}), Point3(2, 3, 4)) == 24);
  PolyField s({{1, {1, 0, 0}}, {1, {0, 1, 0}}, {1, {0, 0, 1}}, {-0.5, {0, 0, 0}}});
  CHECK(poly_eval(s, Point3(0.5, 0.25, 0.25)) == 0.5);
  CHECK(s.degree() == 1);
  CHECK(PolyField({{2, {3, 1, 2}}, {1, {0, 0, 1}}}).degree() == 6);
}

TEST_CASE("polynomial schema violations are rejected") {
  CHECK_THROWS_AS(PolyField({{1, {1, 0, 0}}, {2, {1, 0, 0}}}), InvalidArgument);
  CHECK_THROWS_AS(PolyField(std::vector<Monomial>{{1, {-1, 0, 0}}}), InvalidArgument);
}

TEST_CASE("polynomial gradient matches finite differences") {
  PolyField f({{1.5, {3, 1, 0}}, {-2, {0, 2, 2}}, {0.7, {1, 1, 1}}, {3, {0, 0, 0}}, {-1, {0, 0, 4}}});
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    Point3 p = testing::random_point(rng, -1, 1);
    Vec3 g = f.gradient(p), fd = fd_gradient(f, p, 1e-5);
    CHECK((g - fd).norm() <= 1e-7 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("sphere field is a signed distance") {
  SphereField s(Point3(1, 0, 0), 0.5);
  CHECK(s.value(Point3(1, 0, 0)) == -0.5);
  CHECK(s.value(Point3(3, 0, 0)) == 1.5);
  CHECK((s.gradient(Point3(1, 2, 0)) - Vec3(0, 1, 0)).norm() <= 1e-15);
  CHECK_THROWS_AS(SphereField(Point3(0, 0, 0), -1), InvalidArgument);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    Point3 p = testing::random_point(rng, -2, 2);
    CHECK((s.gradient(p) - fd_gradient(s, p)).norm() <= 1e-8);
  }
}

TEST_CASE("box helpers") {
  Box b{Point3(-1, 0, 0), Point3(1, 2, 2)};
  CHECK(b.extent() == Vec3(2, 2, 2));
  CHECK(b.center() == Point3(0, 1, 1));
  CHECK(b.diagonal() == doctest::Approx(std::sqrt(12.0)));
  CHECK(b.contains(Point3(0, 0, 0)));
  CHECK_FALSE(b.contains(Point3(0, -0.1, 0)));
  CHECK(b.contains(Point3(0, -0.1, 0), 0.2));
}
