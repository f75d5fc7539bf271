// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include "circdet/assignment.hpp"

namespace circdet {

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
///
/// Among assignments whose total is within tie_tolerance() of the optimum,
/// returns the lexicographically smallest column sequence (row 0's column
/// first). Throws ShapeError if rows > cols and NonFiniteCost on NaN/Inf.
Assignment hungarian(const CostMatrix& cost);

/// Optimal total only; O(rows^2 * cols).
double hungarian_min_cost(const CostMatrix& cost);

}  // namespace circdet
