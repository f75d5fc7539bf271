// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/hungarian.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "circdet/errors.hpp"

namespace circdet {
namespace {

void check_input(const CostMatrix& cost) {
  if (cost.rows > cost.cols) {
    throw ShapeError("hungarian: rows (" + std::to_string(cost.rows) +
                     ") exceed cols (" + std::to_string(cost.cols) + ")");
  }
  if (cost.data.size() != cost.rows * cost.cols) {
    throw ShapeError("hungarian: data size does not match shape");
  }
  for (double v : cost.data) {
    if (!std::isfinite(v)) throw NonFiniteCost("hungarian: non-finite cost");
  }
}

// Shortest augmenting path with row/column potentials (rows <= cols).
// Returns col_of_row.
std::vector<std::size_t> solve(const CostMatrix& cost) {
  const std::size_t n = cost.rows;
  const std::size_t m = cost.cols;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based; index 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> row_of_col(m + 1, 0), way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of_col[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of_row(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (row_of_col[j] != 0) col_of_row[row_of_col[j] - 1] = j - 1;
  }
  return col_of_row;
}

double optimum(const CostMatrix& cost) {
  const auto cols = solve(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < cost.rows; ++i) total += cost(i, cols[i]);
  return total;
}

CostMatrix submatrix(const CostMatrix& cost, std::size_t first_row,
                     const std::vector<char>& col_taken) {
  std::vector<std::size_t> free_cols;
  for (std::size_t j = 0; j < cost.cols; ++j) {
    if (!col_taken[j]) free_cols.push_back(j);
  }
  CostMatrix sub(cost.rows - first_row, free_cols.size());
  for (std::size_t i = first_row; i < cost.rows; ++i) {
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
      sub(i - first_row, k) = cost(i, free_cols[k]);
    }
  }
  return sub;
}

}  // namespace

double hungarian_min_cost(const CostMatrix& cost) {
  check_input(cost);
  if (cost.rows == 0) return 0.0;
  return optimum(cost);
}

Assignment hungarian(const CostMatrix& cost) {
  check_input(cost);
  Assignment result;
  if (cost.rows == 0) return result;

  const double best = optimum(cost);
  const double bound = best + tie_tolerance(best);

  // Fix rows in order, each to the smallest column that still admits a
  // completion within the tie bound.
  std::vector<char> taken(cost.cols, 0);
  double fixed = 0.0;
  for (std::size_t i = 0; i < cost.rows; ++i) {
    bool placed = false;
    for (std::size_t j = 0; j < cost.cols && !placed; ++j) {
      if (taken[j]) continue;
      taken[j] = 1;
      const double rest =
          i + 1 < cost.rows ? optimum(submatrix(cost, i + 1, taken)) : 0.0;
      if (fixed + cost(i, j) + rest <= bound) {
        fixed += cost(i, j);
        result.pairs.push_back({i, j});
        placed = true;
      } else {
        taken[j] = 0;
      }
    }
    if (!placed) {
      // Only reachable through accumulated rounding; the optimum itself
      // always admits a completion.
      throw Error("hungarian: tie refinement lost the optimum");
    }
  }
  return result;
}

}  // namespace circdet
