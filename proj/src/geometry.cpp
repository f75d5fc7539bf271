// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>
#include <utility>

namespace circdet {
namespace {

constexpr double kPi = std::numbers::pi;

enum class PairCase { kDisjoint, kOverlap, kNested };

// Orders a pair so that every symmetric quantity is evaluated with the same
// operand order regardless of argument order.
std::pair<const Circle&, const Circle&> canonical(const Circle& a,
                                                  const Circle& b) {
  if (std::tie(a.r, a.x, a.y) <= std::tie(b.r, b.x, b.y)) return {a, b};
  return {b, a};
}

PairCase classify(double d, double ra, double rb) {
  if (d >= ra + rb - kCaseSlack) return PairCase::kDisjoint;
  if (d <= std::abs(ra - rb) + kCaseSlack) return PairCase::kNested;
  return PairCase::kOverlap;
}

// Half-angle subtended at the center of the circle with radius `ra` by the
// chord shared with the other circle.
double half_angle(double d, double ra, double rb) {
  const double c = (d * d + ra * ra - rb * rb) / (2.0 * d * ra);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Heron-style product (4 * d * half chord)^2 for the lens chord.
double chord_product(double d, double ra, double rb) {
  const double k = (-d + ra + rb) * (d + ra - rb) * (d - ra + rb) * (d + ra + rb);
  return std::sqrt(std::max(0.0, k));
}

double lens_area(double d, double ra, double rb) {
  return ra * ra * half_angle(d, ra, rb) + rb * rb * half_angle(d, rb, ra) -
         0.5 * chord_product(d, ra, rb);
}

// Every area term gciou / ciou need, plus partial derivatives with respect to
// the center distance and the radius of the first circle.
struct PairTerms {
  PairCase kind;
  double d;
  double inter, uni, enclosing;        // I, U, area of enclosing circle
  double dI_dd, dI_dr, dU_dd, dU_dr;   // w.r.t. d and r of `a`
  double dC_dd, dC_dr;
};

PairTerms pair_terms(const Circle& a, const Circle& b) {
  PairTerms t{};
  const double ra = a.r;
  const double rb = b.r;
  const double d = center_distance(a, b);
  t.d = d;
  t.kind = classify(d, ra, rb);

  const double area_a = kPi * ra * ra;
  const double area_b = kPi * rb * rb;

  double radius_c = 0.0, dR_dd = 0.0, dR_dr = 0.0;
  switch (t.kind) {
    case PairCase::kDisjoint:
      t.inter = 0.0;
      radius_c = 0.5 * (d + ra + rb);
      dR_dd = dR_dr = 0.5;
      break;
    case PairCase::kOverlap:
      t.inter = lens_area(d, ra, rb);
      t.dI_dd = -chord_product(d, ra, rb) / d;
      t.dI_dr = 2.0 * ra * half_angle(d, ra, rb);
      radius_c = 0.5 * (d + ra + rb);
      dR_dd = dR_dr = 0.5;
      break;
    case PairCase::kNested:
      if (ra <= rb) {
        t.inter = area_a;
        t.dI_dr = 2.0 * kPi * ra;
        radius_c = rb;
      } else {
        t.inter = area_b;
        radius_c = ra;
        dR_dr = 1.0;
      }
      break;
  }

  t.uni = area_a + area_b - t.inter;
  t.dU_dd = -t.dI_dd;
  t.dU_dr = 2.0 * kPi * ra - t.dI_dr;
  t.enclosing = kPi * radius_c * radius_c;
  t.dC_dd = 2.0 * kPi * radius_c * dR_dd;
  t.dC_dr = 2.0 * kPi * radius_c * dR_dr;
  if (t.kind == PairCase::kNested) t.uni = t.enclosing;
  return t;
}

void check_differentiable(const Circle& a, const Circle& b) {
  const double d = center_distance(a, b);
  if (std::abs(d - (a.r + b.r)) <= kSingularTol) {
    throw NonDifferentiablePoint("circles are externally tangent");
  }
  if (std::abs(d - std::abs(a.r - b.r)) <= kSingularTol) {
    throw NonDifferentiablePoint("circles are internally tangent or coincide");
  }
}

// Chain rule from (d/dd, d/dr) to (x, y, r) of `a`.
CircleGrad to_param_grad(const Circle& a, const Circle& b, double d,
                         double g_d, double g_r) {
  if (d == 0.0) return {0.0, 0.0, g_r};
  return {g_d * (a.x - b.x) / d, g_d * (a.y - b.y) / d, g_r};
}

}  // namespace

double circle_area(const Circle& c) {
  validate_circle(c);
  return kPi * c.r * c.r;
}

double intersection_area(const Circle& a, const Circle& b) {
  validate_circle(a, "a");
  validate_circle(b, "b");
  const auto [p, q] = canonical(a, b);
  const double d = center_distance(p, q);
  switch (classify(d, p.r, q.r)) {
    case PairCase::kDisjoint:
      return 0.0;
    case PairCase::kNested:
      return kPi * std::min(p.r, q.r) * std::min(p.r, q.r);
    case PairCase::kOverlap:
      break;
  }
  return lens_area(d, p.r, q.r);
}

double union_area(const Circle& a, const Circle& b) {
  return circle_area(a) + circle_area(b) - intersection_area(a, b);
}

double ciou(const Circle& a, const Circle& b) {
  validate_circle(a, "a");
  validate_circle(b, "b");
  const auto [p, q] = canonical(a, b);
  const PairTerms t = pair_terms(p, q);
  return std::clamp(t.inter / t.uni, 0.0, 1.0);
}

Circle enclosing_circle(const Circle& a, const Circle& b) {
  validate_circle(a, "a");
  validate_circle(b, "b");
  const auto [small, big] = canonical(a, b);
  const double d = center_distance(small, big);
  if (d + small.r <= big.r + kCaseSlack) return big;
  const double radius = 0.5 * (d + small.r + big.r);
  const double t = (radius - small.r) / d;
  return {small.x + t * (big.x - small.x), small.y + t * (big.y - small.y),
          radius};
}

double gciou(const Circle& a, const Circle& b) {
  validate_circle(a, "a");
  validate_circle(b, "b");
  const auto [p, q] = canonical(a, b);
  const PairTerms t = pair_terms(p, q);
  const double penalty = std::max(0.0, (t.enclosing - t.uni) / t.enclosing);
  return t.inter / t.uni - penalty;
}

CircleGrad grad_ciou(const Circle& a, const Circle& b) {
  validate_circle(a, "a");
  validate_circle(b, "b");
  check_differentiable(a, b);
  const PairTerms t = pair_terms(a, b);
  const double u2 = t.uni * t.uni;
  const double g_d = (t.dI_dd * t.uni - t.inter * t.dU_dd) / u2;
  const double g_r = (t.dI_dr * t.uni - t.inter * t.dU_dr) / u2;
  return to_param_grad(a, b, t.d, g_d, g_r);
}

CircleGrad grad_gciou(const Circle& a, const Circle& b) {
  validate_circle(a, "a");
  validate_circle(b, "b");
  check_differentiable(a, b);
  const PairTerms t = pair_terms(a, b);
  const double u2 = t.uni * t.uni;
  const double c2 = t.enclosing * t.enclosing;
  // gciou = I/U - 1 + U/C
  double g_d = (t.dI_dd * t.uni - t.inter * t.dU_dd) / u2;
  double g_r = (t.dI_dr * t.uni - t.inter * t.dU_dr) / u2;
  if (t.kind != PairCase::kNested) {
    g_d += (t.dU_dd * t.enclosing - t.uni * t.dC_dd) / c2;
    g_r += (t.dU_dr * t.enclosing - t.uni * t.dC_dr) / c2;
  }
  return to_param_grad(a, b, t.d, g_d, g_r);
}

}  // namespace circdet
