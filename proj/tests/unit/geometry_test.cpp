// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "circdet/errors.hpp"
#include "circdet/geometry.hpp"
#include "circdet/harness.hpp"
#include "circdet/oracle.hpp"

namespace circdet {
namespace {

using std::numbers::pi;

// 2 acos(1/2) - sqrt(3)/2, the lens of two unit circles one radius apart.
const double kUnitLens = 2.0 * std::acos(0.5) - std::sqrt(3.0) / 2.0;

TEST(CircleArea, Examples) {
  EXPECT_DOUBLE_EQ(circle_area({0, 0, 1}), pi);
  EXPECT_DOUBLE_EQ(circle_area({0.3, 0.7, 2}), 4 * pi);
  EXPECT_DOUBLE_EQ(circle_area({0, 0, 0.5}), pi / 4);
}

TEST(CircleArea, RejectsBadRadius) {
  EXPECT_THROW(circle_area({0, 0, 0}), InvalidCircle);
  EXPECT_THROW(circle_area({0, 0, -1}), InvalidCircle);
  EXPECT_THROW(circle_area({NAN, 0, 1}), InvalidCircle);
  EXPECT_THROW(intersection_area({0, 0, 1}, {0, 0, INFINITY}), InvalidCircle);
}

TEST(IntersectionArea, Examples) {
  EXPECT_EQ(intersection_area({0, 0, 1}, {3, 0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(intersection_area({0, 0, 3}, {1, 0, 1}), pi);
  EXPECT_NEAR(intersection_area({0, 0, 1}, {1, 0, 1}), kUnitLens, 1e-14);
  EXPECT_NEAR(kUnitLens, 1.228369698608757, 1e-15);
}

TEST(IntersectionArea, AgreesWithMonteCarloAtUnitLens) {
  const auto est = oracle::mc_intersection_area({0, 0, 1}, {1, 0, 1}, 10'000'000, 1);
  EXPECT_LE(std::abs(est.estimate - intersection_area({0, 0, 1}, {1, 0, 1})), 4 * est.std_error);
}

TEST(IntersectionArea, ContinuousAcrossCaseBoundaries) {
  // Approaching tangency from inside and containment from outside.
  EXPECT_NEAR(intersection_area({0, 0, 1}, {2 - 1e-9, 0, 1}), 0.0, 1e-12);
  EXPECT_NEAR(intersection_area({0, 0, 3}, {2 - 1e-9, 0, 1}), pi, 1e-6);
  EXPECT_NEAR(intersection_area({0, 0, 3}, {2 + 1e-9, 0, 1}), pi, 1e-6);
}

TEST(Ciou, Examples) {
  EXPECT_EQ(ciou({0.2, 0.4, 0.1}, {0.2, 0.4, 0.1}), 1.0);
  EXPECT_EQ(ciou({0, 0, 1}, {3, 0, 1}), 0.0);
  // Independent evaluation of I / (2 pi - I).
  EXPECT_NEAR(ciou({0, 0, 1}, {1, 0, 1}), kUnitLens / (2 * pi - kUnitLens), 1e-14);
  EXPECT_NEAR(ciou({0, 0, 1}, {1, 0, 1}), 0.2430098, 1e-7);
}

// Containment check used as the enclosing-circle oracle.
bool contains(const Circle& outer, const Circle& inner) {
  return std::hypot(outer.x - inner.x, outer.y - inner.y) + inner.r <= outer.r + 1e-9;
}

TEST(EnclosingCircle, Examples) {
  EXPECT_EQ(enclosing_circle({0, 0, 1}, {4, 0, 1}), (Circle{2, 0, 3}));
  EXPECT_EQ(enclosing_circle({0, 0, 3}, {1, 0, 1}), (Circle{0, 0, 3}));
  EXPECT_EQ(enclosing_circle({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}), (Circle{0.1, 0.2, 0.3}));
}

TEST(EnclosingCircle, ContainsBothAndIsSymmetric) {
  Rng rng(5);
  for (int t = 0; t < 10000; ++t) {
    const Circle a = random_circle(rng), b = random_circle(rng);
    const Circle c = enclosing_circle(a, b);
    ASSERT_TRUE(contains(c, a) && contains(c, b));
    ASSERT_EQ(c, enclosing_circle(b, a));
    // Minimal: either it is one of the inputs or its radius is (d + ra + rb) / 2.
    const double d = std::hypot(a.x - b.x, a.y - b.y);
    ASSERT_NEAR(c.r, std::max({a.r, b.r, (d + a.r + b.r) / 2}), 1e-12);
  }
}

TEST(Gciou, Examples) {
  EXPECT_EQ(gciou({0.5, 0.5, 0.2}, {0.5, 0.5, 0.2}), 1.0);
  EXPECT_NEAR(gciou({0, 0, 1}, {2, 0, 1}), -0.5, 1e-12);
  EXPECT_NEAR(gciou({0, 0, 2}, {0, 0, 1}), 0.25, 1e-12);
}

TEST(Gciou, ExamplesAgreeWithMonteCarlo) {
  const auto tangent = oracle::mc_gciou({0, 0, 1}, {2, 0, 1}, 1'000'000, 3);
  EXPECT_LE(std::abs(tangent.estimate + 0.5), 4 * tangent.std_error);
  const auto concentric = oracle::mc_gciou({0, 0, 2}, {0, 0, 1}, 1'000'000, 4);
  EXPECT_LE(std::abs(concentric.estimate - 0.25), 4 * concentric.std_error);
}

TEST(Gciou, EqualsCiouUnderContainment) {
  Rng rng(17);
  for (int t = 0; t < 1000; ++t) {
    const Circle big = random_circle(rng, 0.2, 0.4);
    const double r = rng.uniform(0.01, big.r * 0.9);
    const double off = rng.uniform(0.0, big.r - r);
    const Circle small{big.x + off, big.y, r};
    ASSERT_NEAR(gciou(big, small), ciou(big, small), 1e-15);
  }
}

TEST(GeometryProperties, SymmetryBoundsAndInvariance) {
  Rng rng(11);
  for (int t = 0; t < 10000; ++t) {
    const Circle a = random_circle(rng), b = random_circle(rng);
    ASSERT_LT(std::abs(ciou(a, b) - ciou(b, a)), 1e-12);
    ASSERT_LT(std::abs(gciou(a, b) - gciou(b, a)), 1e-12);
    ASSERT_LT(std::abs(intersection_area(a, b) - intersection_area(b, a)), 1e-12);

    const double c = ciou(a, b), g = gciou(a, b);
    ASSERT_GE(c, 0.0);
    ASSERT_LE(c, 1.0);
    ASSERT_GT(g, -1.0);
    ASSERT_LE(g, c);

    const double tx = rng.uniform(-3, 3), ty = rng.uniform(-3, 3);
    const Circle at{a.x + tx, a.y + ty, a.r}, bt{b.x + tx, b.y + ty, b.r};
    ASSERT_LT(std::abs(ciou(at, bt) - c), 1e-12);
    ASSERT_LT(std::abs(gciou(at, bt) - g), 1e-12);

    const double s = rng.uniform(0.01, 100.0);
    const Circle as{a.x * s, a.y * s, a.r * s}, bs{b.x * s, b.y * s, b.r * s};
    ASSERT_LT(std::abs(ciou(as, bs) - c), 1e-9);
    ASSERT_LT(std::abs(gciou(as, bs) - g), 1e-9);
  }
}

TEST(GeometryProperties, GciouDecreasesWithDistanceWhileCiouIsFlat) {
  double prev = gciou({0, 0, 1}, {2, 0, 1});
  for (double d = 2.001; d <= 10.0; d += 0.001) {
    const double g = gciou({0, 0, 1}, {d, 0, 1});
    ASSERT_LT(g, prev) << "d=" << d;
    ASSERT_EQ(ciou({0, 0, 1}, {d, 0, 1}), 0.0);
    prev = g;
  }
}

TEST(GeometryProperties, OracleEquivalence) {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const Circle a = random_circle(rng, 0.05, 0.3);
    const Circle b{a.x + rng.uniform(-0.4, 0.4), a.y + rng.uniform(-0.4, 0.4), rng.uniform(0.05, 0.3)};
    const auto est = oracle::mc_intersection_area(a, b, 200'000, rng.bits());
    ASSERT_LE(std::abs(est.estimate - intersection_area(a, b)), 4 * est.std_error + 1e-15);
  }
}

std::vector<double> fd_gciou(const Circle& a, const Circle& b, double h) {
  const double p[3] = {a.x, a.y, a.r};
  return oracle::finite_diff_grad(
      [&](std::span<const double> v) { return gciou({v[0], v[1], v[2]}, b); }, p, h);
}

TEST(GradGciou, IdenticalCirclesAreSingular) {
  EXPECT_THROW(grad_gciou({0.5, 0.5, 0.2}, {0.5, 0.5, 0.2}), NonDifferentiablePoint);
  // The finite-difference fallback sees no x/y slope at a = b by symmetry.
  const auto fd = fd_gciou({0.5, 0.5, 0.2}, {0.5, 0.5, 0.2}, 1e-6);
  EXPECT_NEAR(fd[0], 0.0, 1e-9);
  EXPECT_NEAR(fd[1], 0.0, 1e-9);
}

TEST(GradGciou, SingularConfigurations) {
  EXPECT_THROW(grad_gciou({0, 0, 1}, {2, 0, 1}), NonDifferentiablePoint);          // tangent
  EXPECT_THROW(grad_gciou({0, 0, 2}, {1, 0, 1}), NonDifferentiablePoint);          // internally tangent
  EXPECT_THROW(grad_gciou({0, 0, 1}, {2 + 5e-10, 0, 1}), NonDifferentiablePoint);  // within tolerance
  EXPECT_NO_THROW(grad_gciou({0, 0, 1}, {2 + 1e-6, 0, 1}));
}

TEST(GradGciou, DisjointPullsTowardTarget) {
  const auto g = grad_gciou({0, 0, 1}, {3, 0, 1});
  EXPECT_GT(g[0], 0.0);
  EXPECT_NEAR(g[1], 0.0, 1e-15);
  const auto fd = fd_gciou({0, 0, 1}, {3, 0, 1}, 1e-6);
  EXPECT_GT(fd[0], 0.0);
}

TEST(GradGciou, MatchesFiniteDifferencesSeed7) {
  Rng rng(7);
  const Circle a = random_circle(rng), b = random_circle(rng);
  const auto g = grad_gciou(a, b);
  EXPECT_LT(relative_error({g[0], g[1], g[2]}, fd_gciou(a, b, 1e-6)), 1e-5);
}

TEST(GradGciou, MatchesFiniteDifferencesAcrossCases) {
  Rng rng(29);
  int checked[3] = {0, 0, 0};  // disjoint, overlapping, nested
  for (int t = 0; t < 3000; ++t) {
    const Circle a = random_circle(rng, 0.02, 0.4);
    const Circle b{a.x + rng.uniform(-0.5, 0.5), a.y + rng.uniform(-0.5, 0.5), rng.uniform(0.02, 0.4)};
    CircleGrad g;
    try {
      g = grad_gciou(a, b);
    } catch (const NonDifferentiablePoint&) {
      continue;
    }
    const double d = std::hypot(a.x - b.x, a.y - b.y);
    // Keep clear of the kinks so the central difference stays on one branch.
    if (std::abs(d - a.r - b.r) < 1e-4 || std::abs(d - std::abs(a.r - b.r)) < 1e-4) continue;
    const int kind = d >= a.r + b.r ? 0 : (d <= std::abs(a.r - b.r) ? 2 : 1);
    ++checked[kind];
    ASSERT_LT(relative_error({g[0], g[1], g[2]}, fd_gciou(a, b, 1e-6)), 1e-5)
        << "case " << kind << " a=(" << a.x << "," << a.y << "," << a.r << ")";
  }
  EXPECT_GT(checked[0], 100);
  EXPECT_GT(checked[1], 100);
  EXPECT_GT(checked[2], 100);
}

TEST(GradCiou, MatchesFiniteDifferencesAndVanishesWhenDisjoint) {
  Rng rng(31);
  for (int t = 0; t < 1000; ++t) {
    const Circle a = random_circle(rng, 0.05, 0.3);
    const Circle b{a.x + rng.uniform(-0.4, 0.4), a.y + rng.uniform(-0.4, 0.4), rng.uniform(0.05, 0.3)};
    const double d = std::hypot(a.x - b.x, a.y - b.y);
    if (std::abs(d - a.r - b.r) < 1e-4 || std::abs(d - std::abs(a.r - b.r)) < 1e-4) continue;
    const auto g = grad_ciou(a, b);
    const double p[3] = {a.x, a.y, a.r};
    const auto fd = oracle::finite_diff_grad(
        [&](std::span<const double> v) { return ciou({v[0], v[1], v[2]}, b); }, p, 1e-6);
    if (d > a.r + b.r) {
      ASSERT_EQ(g[0], 0.0);
      ASSERT_EQ(g[1], 0.0);
      ASSERT_EQ(g[2], 0.0);
    } else {
      ASSERT_LT(relative_error({g[0], g[1], g[2]}, fd), 1e-5);
    }
  }
}

}  // namespace
}  // namespace circdet
