// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

// Independent reference implementations used to verify the closed forms.
// Nothing here calls into geometry.cpp or hungarian.cpp.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "circdet/assignment.hpp"
#include "circdet/circle.hpp"

namespace circdet::oracle {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Hit-or-miss estimate of the lens area over the pair's bounding box.
/// Requires n >= 1000.
McEstimate mc_intersection_area(const Circle& a, const Circle& b,
                                std::int64_t n, std::uint64_t seed);

/// gCIoU from Monte Carlo intersection / union areas and the exact enclosing
/// circle area. The standard error comes from the delta method on the joint
/// (intersection, union) hit indicators.
McEstimate mc_gciou(const Circle& a, const Circle& b, std::int64_t n,
                    std::uint64_t seed);

/// Exhaustive search over injective row->column maps (rows <= 8), returning
/// the lexicographically first one within tie_tolerance() of the optimum.
Assignment brute_force_assignment(const CostMatrix& cost);

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
std::vector<double> finite_diff_grad(const ScalarFn& fn,
                                     std::span<const double> point, double h);

}  // namespace circdet::oracle
