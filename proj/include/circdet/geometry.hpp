// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <array>

#include "circdet/circle.hpp"

namespace circdet {

/// Gradient with respect to (x, y, r) of the first circle argument.
using CircleGrad = std::array<double, 3>;

/// Slack used to classify disjoint / overlapping / nested configurations.
inline constexpr double kCaseSlack = 1e-12;

/// Distance below which a configuration counts as non-differentiable.
inline constexpr double kSingularTol = 1e-9;

double circle_area(const Circle& c);

/// Area of the lens shared by two circles.
double intersection_area(const Circle& a, const Circle& b);

double union_area(const Circle& a, const Circle& b);

/// Circle IoU, in [0, 1].
double ciou(const Circle& a, const Circle& b);

/// Smallest circle containing both inputs.
Circle enclosing_circle(const Circle& a, const Circle& b);

/// Generalized circle IoU: ciou minus the fraction of the enclosing circle
/// not covered by the union. Range (-1, 1].
double gciou(const Circle& a, const Circle& b);

/// d gciou(a, b) / d(a.x, a.y, a.r).
///
/// Throws NonDifferentiablePoint when |d - (ra + rb)| or |d - |ra - rb||
/// is within kSingularTol (external/internal tangency, coincident equal
/// circles).
CircleGrad grad_gciou(const Circle& a, const Circle& b);

/// d ciou(a, b) / d(a.x, a.y, a.r). Same singular set as grad_gciou.
CircleGrad grad_ciou(const Circle& a, const Circle& b);

}  // namespace circdet
