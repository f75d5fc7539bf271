// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <cstddef>
#include <vector>

namespace circdet {

/// Row-major dense matrix of costs, rows = ground truths, cols = predictions.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
};

struct MatchPair {
  std::size_t gt = 0;
  std::size_t pred = 0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

/// One-to-one matching between ground truths and predictions, sorted by gt.
struct Assignment {
  std::vector<MatchPair> pairs;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Sum of the matched entries.
inline double assignment_cost(const CostMatrix& cost, const Assignment& a) {
  double total = 0.0;
  for (const auto& p : a.pairs) total += cost(p.gt, p.pred);
  return total;
}

/// Two optimal totals closer than this are treated as a tie.
inline double tie_tolerance(double optimum) {
  return 1e-9 * (1.0 + (optimum < 0 ? -optimum : optimum));
}

}  // namespace circdet
