#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cip/errors.hh"
#include "cip/patch.hh"
#include "support/random_patch.hh"

using namespace cip;
using cip::testing::random_patch;
using cip::testing::reference_patch;

namespace {

// Direct expansion of the corner patch from constituent values, written
// independently of the library's product bookkeeping.
double brute_force_value(const CornerPatch &patch, const Point3 &p) {
  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  auto b2 = [&](std::ptrdiff_t j) { double b = patch.bound(j).value(p); return b * b; };
  double total = 0;
  for (std::ptrdiff_t i = 1; i <= n; ++i) {
    double corner = patch.corner(i).value(p), side = patch.side_weight(i);
    for (std::ptrdiff_t j = 1; j <= n; ++j) {
      if (j != i && j != i % n + 1)
        corner *= b2(j);
      if (j != i)
        side *= b2(j);
    }
    total += corner + side;
  }
  double interior = patch.interior_weight();
  for (std::ptrdiff_t j = 1; j <= n; ++j)
    interior *= b2(j);
  return total + interior;
}

// The ribbon I-patch written out from its definition: each ribbon is the
// boundary side surface, blended with unit weights and squared bounds.
double brute_force_expansion(const CornerPatch &patch, const Point3 &p) {
  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  auto b = [&](std::ptrdiff_t j) { return patch.bound((j - 1 + 2 * n) % n + 1).value(p); };
  auto s = [&](std::ptrdiff_t j) { return patch.corner((j - 1 + 2 * n) % n + 1).value(p); };
  double total = 0;
  for (std::ptrdiff_t i = 1; i <= n; ++i) {
    double prev = b(i - 1), next = b(i + 1);
    double ribbon = s(i - 1) * next * next + s(i) * prev * prev + patch.side_weight(i) * prev * prev * next * next;
    for (std::ptrdiff_t j = 1; j <= n; ++j)
      if (j != i)
        ribbon *= b(j) * b(j);
    total += ribbon;
  }
  double interior = patch.interior_weight();
  for (std::ptrdiff_t j = 1; j <= n; ++j)
    interior *= b(j) * b(j);
  return total + interior;
}

// A point whose plane value is exactly zero in floating point, found by
// projecting and then stepping one coordinate ulp by ulp.
std::optional<Point3> exact_zero_on(const Plane &plane, Point3 p) {
  p -= plane.value(p) * plane.normal();
  int axis;
  plane.normal().cwiseAbs().maxCoeff(&axis);
  for (int step = 0; step < 200; ++step) {
    double v = plane.value(p);
    if (v == 0)
      return p;
    bool up = (v > 0) != (plane.normal()[axis] > 0);
    p[axis] = std::nextafter(p[axis], up ? INFINITY : -INFINITY);
  }
  return std::nullopt;
}

} // namespace

TEST_CASE("reference patch values") {
  CornerPatch p3 = reference_patch();
  CHECK(corner_patch_eval(p3, Point3(0.5, 0.25, 0.25)) == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(corner_patch_eval(p3, Point3(0, 0, 0.5)) == 0);
  CHECK(corner_patch_eval(p3.with_interior_weight(1), Point3(0.5, 0.25, 0.25)) ==
        doctest::Approx(0.1884765625).epsilon(1e-15));
}

TEST_CASE("reference patch reduces to S times the squared radius") {
  CornerPatch p3 = reference_patch();
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    Point3 p = testing::random_point(rng, -1, 1);
    double oracle = (p.sum() - 0.5) * p.squaredNorm();
    CHECK(p3.value(p) == doctest::Approx(oracle).epsilon(1e-13).scale(1));
  }
}

TEST_CASE("corner patch value matches brute-force expansion") {
  std::mt19937_64 rng(2);
  for (int n = 3; n <= 6; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      auto rp = random_patch(rng, n);
      for (int k = 0; k < 20; ++k) {
        Point3 p = testing::random_point(rng, -0.5, 1.5);
        double oracle = brute_force_value(rp.patch, p);
        CHECK(std::abs(rp.patch.value(p) - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
      }
    }
}

TEST_CASE("corner patch gradient") {
  CornerPatch p3 = reference_patch();
  Vec3 g = corner_patch_gradient(p3, Point3(0, 0, 0.5));
  CHECK((g - Vec3(0.25, 0.25, 0.25)).norm() <= 1e-15);
  CHECK((fd_gradient(p3, Point3(0, 0, 0.5)) - Vec3(0.25, 0.25, 0.25)).norm() <= 1e-9);

  std::mt19937_64 rng(4);
  for (int n = 3; n <= 6; ++n)
    for (int trial = 0; trial < 5; ++trial) {
      auto rp = random_patch(rng, n);
      for (int k = 0; k < 10; ++k) {
        Point3 p = testing::random_point(rng);
        Vec3 a = rp.patch.gradient(p), fd = fd_gradient(rp.patch, p, 1e-5);
        CHECK((a - fd).norm() <= 1e-7 * std::max(1.0, a.norm()));
      }
    }
}

TEST_CASE("corner patch construction errors") {
  auto x = make_plane(Vec3::UnitX(), 0), y = make_plane(Vec3::UnitY(), 0);
  CHECK_THROWS_AS(CornerPatch({x, y}, {x, y}, {0, 0}, 0), InvalidArgument);
  CHECK_THROWS_AS(CornerPatch({x, y, x}, {x, y}, {0, 0, 0}, 0), InvalidArgument);
  CHECK_THROWS_AS(CornerPatch({x, y, nullptr}, {x, y, x}, {0, 0, 0}, 0), InvalidArgument);
}

TEST_CASE("indices are one-based and cyclic") {
  std::mt19937_64 rng(6);
  auto rp = random_patch(rng, 5);
  const CornerPatch &p = rp.patch;
  CHECK(&p.bound(0) == &p.bound(5));
  CHECK(&p.bound(6) == &p.bound(1));
  CHECK(&p.corner(-1) == &p.corner(4));
  CHECK(p.side_weight(0) == p.side_weight(5));
  CornerPatch q = p.with_side_weight(2, 7.5).with_interior_weight(-1);
  CHECK(q.side_weight(2) == 7.5);
  CHECK(q.interior_weight() == -1);
  CHECK(q.side_weight(1) == p.side_weight(1));
}

TEST_CASE("weights enter linearly through the term split") {
  std::mt19937_64 rng(7);
  auto rp = random_patch(rng, 4);
  Point3 p = testing::random_point(rng);
  auto t = rp.patch.terms(p);
  double sum = t.corner_sum + t.interior_basis * rp.patch.interior_weight();
  for (std::size_t i = 0; i < 4; ++i)
    sum += rp.patch.side_weights()[i] * t.side_basis[i];
  CHECK(sum == doctest::Approx(rp.patch.value(p)).epsilon(1e-13));
}

TEST_CASE("side I-patch evaluation") {
  FieldPtr s = make_poly({{1, {1, 0, 0}}, {1, {0, 1, 0}}, {1, {0, 0, 1}}, {-0.5, {0, 0, 0}}});
  auto y = make_plane(Vec3::UnitY(), 0), z = make_plane(Vec3::UnitZ(), 0);
  SideIPatch two({s, s}, {y, z}, {1, 1}, 0, 2);
  CHECK(side_ipatch_eval(two, Point3(0, 0.3, 0.3)) == doctest::Approx(0.018).epsilon(1e-14));
  SideIPatch with_c({s, s}, {y, z}, {1, 1}, 3, 2);
  Point3 p(0.2, 0.7, -0.4);
  double sv = p.sum() - 0.5;
  CHECK(with_c.value(p) == doctest::Approx(sv * 0.16 + sv * 0.49 + 3 * 0.49 * 0.16).epsilon(1e-14));

  auto zero = make_constant(0);
  SideIPatch collapsed({zero, zero, zero}, {y, z, make_plane(Vec3::UnitX(), -1)}, {2, 3, 4}, 1.5, 3);
  Point3 q(0.3, 0.6, 0.9);
  CHECK(collapsed.value(q) == doctest::Approx(1.5 * std::pow(0.6 * 0.9 * (0.3 - 1), 3)).epsilon(1e-14));

  CHECK_THROWS_AS(SideIPatch({s}, {y}, {1}, 0, 2), InvalidArgument);
  CHECK_THROWS_AS(SideIPatch({s, s}, {y, z}, {1, 0}, 0, 2), InvalidArgument);
  CHECK_THROWS_AS(SideIPatch({s, s}, {y, z}, {1, 1}, 0, 1), InvalidArgument);
}

TEST_CASE("side I-patch gradient matches finite differences") {
  std::mt19937_64 rng(9);
  for (int k = 3; k <= 4; ++k) {
    auto rp = random_patch(rng, 4);
    std::vector<FieldPtr> ribbons, bounds;
    for (int i = 1; i <= 4; ++i) {
      ribbons.push_back(rp.patch.corner_ptr(i));
      bounds.push_back(rp.patch.bound_ptr(i));
    }
    SideIPatch patch(ribbons, bounds, {1, -2, 0.5, 3}, 0.7, k);
    for (int s = 0; s < 10; ++s) {
      Point3 p = testing::random_point(rng);
      Vec3 a = patch.gradient(p), fd = fd_gradient(patch, p);
      CHECK((a - fd).norm() <= 1e-7 * std::max(1.0, a.norm()));
    }
    // w0 times four bounds to the k outgrows each ribbon term's 1 + 3k
    CHECK(patch.degree() == 4 * k);
  }
}

TEST_CASE("boundary side surface") {
  CornerPatch p3 = reference_patch();
  CHECK(boundary_side_field(p3, 1)->value(Point3(0, 0.3, 0.3)) == doctest::Approx(0.018).epsilon(1e-14));
  auto solved = boundary_side_field(p3.with_side_weight(1, -20.0 / 9.0), 1);
  CHECK(std::abs(solved->value(Point3(0, 0.3, 0.3))) <= 1e-15);
  CHECK_THROWS_AS(boundary_side_field(p3, 0), InvalidArgument);
  CHECK_THROWS_AS(boundary_side_field(p3, 4), InvalidArgument);
}

TEST_CASE("on a bound the patch factors into the side surface times the far bounds") {
  std::mt19937_64 rng(10);
  int compared = 0;
  for (int n = 3; n <= 6; ++n)
    for (int trial = 0; trial < 5; ++trial) {
      auto rp = random_patch(rng, n);
      for (std::ptrdiff_t i = 1; i <= n; ++i) {
        const auto &bound = static_cast<const Plane &>(rp.patch.bound(i));
        auto side = boundary_side_field(rp.patch, i);
        for (int k = 0; k < 20; ++k) {
          auto p = exact_zero_on(bound, testing::random_point(rng));
          if (!p)
            continue;
          double c = 1;
          for (std::ptrdiff_t j = 1; j <= n; ++j)
            if (j != i && j != i - 1 && !(i == 1 && j == n) && j != i % n + 1)
              c *= std::pow(rp.patch.bound(j).value(*p), 2);
          if (std::abs(c) < 1e-6)
            continue;
          double lhs = rp.patch.value(*p), rhs = c * side->value(*p);
          CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(std::abs(lhs), 1e-300));
          ++compared;
        }
      }
    }
  CHECK(compared > 500);
}

TEST_CASE("values on a bound ignore every weight but that side's") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> w(-100, 100);
  int compared = 0;
  for (int n = 3; n <= 6; ++n)
    for (int trial = 0; trial < 5; ++trial) {
      auto rp = random_patch(rng, n);
      for (std::ptrdiff_t i = 1; i <= n; ++i) {
        const auto &bound = static_cast<const Plane &>(rp.patch.bound(i));
        for (int k = 0; k < 10; ++k) {
          auto p = exact_zero_on(bound, testing::random_point(rng));
          if (!p)
            continue;
          std::vector<double> weights = rp.patch.side_weights();
          for (std::size_t j = 0; j < weights.size(); ++j)
            if (j != rp.patch.wrap(i))
              weights[j] = w(rng);
          CornerPatch other = rp.patch.with_weights(weights, w(rng));
          CHECK(other.value(*p) == rp.patch.value(*p));
          ++compared;
        }
      }
    }
  CHECK(compared > 500);
}

TEST_CASE("ribbon I-patch expansion") {
  CornerPatch p3 = reference_patch();
  auto e = ribbon_ipatch_expand(p3);
  CHECK(e->gradient(Point3(0, 0, 0.5)).norm() == 0);
  CHECK(fd_gradient(*e, Point3(0, 0, 0.5)).norm() <= 1e-9);

  std::mt19937_64 rng(13);
  for (int n = 3; n <= 6; ++n) {
    auto rp = random_patch(rng, n);
    auto expanded = ribbon_ipatch_expand(rp.patch);
    for (int k = 0; k < 25; ++k) {
      Point3 p = testing::random_point(rng, -0.5, 1.5);
      double oracle = brute_force_expansion(rp.patch, p);
      CHECK(std::abs(expanded->value(p) - oracle) <= 1e-9 * std::max(std::abs(oracle), 1e-12));
    }
  }
}

TEST_CASE("corner gradients: nonzero multiple for the corner patch, zero for the expansion") {
  std::mt19937_64 rng(14);
  for (int n = 3; n <= 6; ++n)
    for (int trial = 0; trial < 5; ++trial) {
      auto rp = random_patch(rng, n);
      auto expanded = ribbon_ipatch_expand(rp.patch);
      for (std::ptrdiff_t i = 1; i <= n; ++i) {
        Point3 c = rp.corners[static_cast<std::size_t>(i - 1)];
        auto found = find_corner_point(rp.patch, i, Point3::Constant(0.5));
        REQUIRE(found);
        CHECK((*found - c).norm() <= 1e-12);
        CHECK(std::abs(rp.patch.value(*found)) <= 1e-12);
        auto ratio = corner_gradient_ratio(rp.patch, i, *found);
        CHECK_FALSE(ratio.degenerate);
        CHECK(ratio.angle <= 1e-6);
        CHECK(ratio.lambda > 0);
        CHECK(rp.patch.gradient(*found).norm() >= 1e-8);
        CHECK(expanded->gradient(*found).norm() <= 1e-9);
      }
    }
}

TEST_CASE("corner gradient ratio") {
  CornerPatch p3 = reference_patch();
  auto r = corner_gradient_ratio(p3, 1, Point3(0, 0, 0.5));
  CHECK(r.lambda == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(r.angle == 0);
  CHECK_FALSE(r.degenerate);

  // Doubling S doubles the patch gradient at the corner; the ratio to the
  // (also doubled) interpolant gradient stays put.
  FieldPtr s2 = make_poly({{2, {1, 0, 0}}, {2, {0, 1, 0}}, {2, {0, 0, 1}}, {-1, {0, 0, 0}}});
  CornerPatch doubled({p3.bound_ptr(1), p3.bound_ptr(2), p3.bound_ptr(3)}, {s2, s2, s2}, {0, 0, 0}, 0);
  auto r2 = corner_gradient_ratio(doubled, 1, Point3(0, 0, 0.5));
  CHECK(r2.lambda == doctest::Approx(0.25).epsilon(1e-15));
  CHECK((doubled.gradient(Point3(0, 0, 0.5)) - 2 * p3.gradient(Point3(0, 0, 0.5))).norm() <= 1e-15);

  FieldPtr through_origin = make_poly({{1, {1, 0, 0}}, {1, {0, 1, 0}}});
  CornerPatch flat({p3.bound_ptr(1), p3.bound_ptr(2), p3.bound_ptr(3)},
                   {through_origin, p3.corner_ptr(2), p3.corner_ptr(3)}, {0, 0, 0}, 0);
  auto d = corner_gradient_ratio(flat, 1, Point3(0, 0, 0));
  CHECK(d.degenerate);
  CHECK(d.lambda == 0);

  CHECK_THROWS_AS(corner_gradient_ratio(p3, 1, Point3(0, 0, 0.6)), InvalidArgument);
  CHECK_THROWS_AS(corner_gradient_ratio(p3, 1, Point3(0.1, 0, 0.4)), InvalidArgument);
  CHECK_THROWS_AS(corner_gradient_ratio(p3, 4, Point3(0, 0, 0.5)), InvalidArgument);
  CornerPatch constant({p3.bound_ptr(1), p3.bound_ptr(2), p3.bound_ptr(3)},
                       {make_constant(0), p3.corner_ptr(2), p3.corner_ptr(3)}, {0, 0, 0}, 0);
  CHECK_THROWS_AS(corner_gradient_ratio(constant, 1, Point3(0, 0, 0.5)), InvalidArgument);
}

TEST_CASE("distinct constituents") {
  CornerPatch p3 = reference_patch();
  CHECK_NOTHROW(validate_distinct(p3, Box{}));
  auto x2 = make_plane(Vec3(-2, 0, 0), 0);
  CornerPatch twice({p3.bound_ptr(1), p3.bound_ptr(2), x2}, {p3.corner_ptr(1), p3.corner_ptr(2), p3.corner_ptr(3)},
                    {0, 0, 0}, 0);
  CHECK_THROWS_AS(validate_distinct(twice, Box{}), InvalidArgument);
  CornerPatch on_bound({p3.bound_ptr(1), p3.bound_ptr(2), p3.bound_ptr(3)},
                       {p3.corner_ptr(1), make_plane(Vec3(0, 3, 0), 0), p3.corner_ptr(3)}, {0, 0, 0}, 0);
  CHECK_THROWS_AS(validate_distinct(on_bound, Box{}), InvalidArgument);
}

TEST_CASE("forward differences annihilate polynomials of lower degree") {
  PolyField quintic({{1, {5, 0, 0}}, {-3, {2, 1, 0}}, {1, {0, 0, 0}}});
  Point3 o(0.2, -0.1, 0.4);
  Vec3 d = Vec3(1, 2, -1).normalized();
  CHECK(forward_difference_residual(quintic, o, d, 6) <= 1e-12);
  CHECK(forward_difference_residual(quintic, o, d, 5) > 1e-3);
  CHECK(line_degree(quintic, o, d, 8) == 5);
  CHECK(line_degree(quintic, o, d, 3) == 4);
  CHECK(forward_difference_residual(*make_constant(0), o, d, 2) == 0);
  CHECK_THROWS_AS(forward_difference_residual(quintic, o, d, 0), InvalidArgument);
}

// Order-m forward difference of f(o + t d) over m+1 samples with t in [-1, 1],
// together with the largest sample magnitude.
std::pair<double, double> raw_difference(const Field &f, const Point3 &o, const Vec3 &d, int m) {
  double diff = 0, largest = 0, binom = 1;
  for (int k = 0; k <= m; ++k) {
    double v = f.value(o + (-1.0 + 2.0 * k / m) * d);
    largest = std::max(largest, std::abs(v));
    diff += ((m - k) % 2 == 0 ? binom : -binom) * v;
    binom = binom * (m - k) / (k + 1);
  }
  return {diff, largest};
}

// m! h^m: the order-m difference of t^m at step h = 2/m.
double monomial_difference(int m) {
  double r = 1;
  for (int k = 1; k <= m; ++k)
    r *= k * (2.0 / m);
  return r;
}

TEST_CASE("degree 2n for the corner patch, 2n+2 for the expansion") {
  std::mt19937_64 rng(15);
  for (int n = 3; n <= 6; ++n) {
    auto rp = random_patch(rng, n);
    auto expanded = ribbon_ipatch_expand(rp.patch);
    CHECK(rp.patch.degree() == 2 * n);
    CHECK(expanded->degree() == 2 * n + 2);
    for (int k = 0; k < 20; ++k) {
      Point3 o = testing::random_point(rng);
      Vec3 d = testing::random_unit(rng);
      CHECK(forward_difference_residual(rp.patch, o, d, 2 * n + 1) <= 1e-6);
      CHECK(forward_difference_residual(*expanded, o, d, 2 * n + 3) <= 1e-6);

      // Top-degree coefficients along the line, expanded by hand: only the
      // interior term reaches 2n in the patch, and only the ribbons'
      // w_i B_{i-1}^2 B_{i+1}^2 parts reach 2n+2 in the expansion.
      auto slope = [&](std::ptrdiff_t j) { return rp.patch.bound(j).gradient(o).dot(d); };
      auto squares_except = [&](std::ptrdiff_t skip) {
        double r = 1;
        for (std::ptrdiff_t j = 1; j <= n; ++j)
          if (j != skip)
            r *= slope(j) * slope(j);
        return r;
      };
      double top = rp.patch.interior_weight() * squares_except(0), top_expanded = 0;
      for (std::ptrdiff_t i = 1; i <= n; ++i)
        top_expanded += rp.patch.side_weight(i) * slope(i - 1) * slope(i - 1) * slope(i + 1) * slope(i + 1) *
                        squares_except(i);

      auto [diff, largest] = raw_difference(rp.patch, o, d, 2 * n);
      double predicted = monomial_difference(2 * n) * top;
      CHECK(std::abs(diff - predicted) <= 1e-8 * largest + 1e-9 * std::abs(predicted));
      if (std::abs(predicted) > 1e-4 * largest)
        CHECK(line_degree(rp.patch, o, d, 2 * n + 4) == 2 * n);
      else
        CHECK(line_degree(rp.patch, o, d, 2 * n + 4) <= 2 * n);

      auto [diff2, largest2] = raw_difference(*expanded, o, d, 2 * n + 2);
      double predicted2 = monomial_difference(2 * n + 2) * top_expanded;
      CHECK(std::abs(diff2 - predicted2) <= 1e-8 * largest2 + 1e-9 * std::abs(predicted2));
      if (std::abs(predicted2) > 1e-4 * largest2)
        CHECK(line_degree(*expanded, o, d, 2 * n + 4) == 2 * n + 2);
      else
        CHECK(line_degree(*expanded, o, d, 2 * n + 4) <= 2 * n + 2);
    }
  }
}

TEST_CASE("angle between vectors") {
  CHECK(angle_between(Vec3(1, 0, 0), Vec3(0, 1, 0)) == doctest::Approx(M_PI / 2));
  CHECK(angle_between(Vec3(1, 0, 0), Vec3(-2, 0, 0)) == doctest::Approx(M_PI));
  CHECK(angle_between(Vec3(1, 1, 0), Vec3(3, 3, 0)) == 0);
}
