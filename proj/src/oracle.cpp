// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "circdet/errors.hpp"
#include "circdet/random.hpp"

namespace circdet::oracle {
namespace {

struct Box {
  double x0, y0, x1, y1;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

Box bounding_box(const Circle& a, const Circle& b) {
  return {std::min(a.x - a.r, b.x - b.r), std::min(a.y - a.r, b.y - b.r),
          std::max(a.x + a.r, b.x + b.r), std::max(a.y + a.r, b.y + b.r)};
}

bool inside(const Circle& c, double x, double y) {
  const double dx = x - c.x;
  const double dy = y - c.y;
  return dx * dx + dy * dy <= c.r * c.r;
}

struct HitCounts {
  std::int64_t both = 0;
  std::int64_t either = 0;
};

HitCounts sample(const Circle& a, const Circle& b, const Box& box,
                 std::int64_t n, std::uint64_t seed) {
  Rng rng(seed);
  HitCounts h;
  for (std::int64_t s = 0; s < n; ++s) {
    const double x = rng.uniform(box.x0, box.x1);
    const double y = rng.uniform(box.y0, box.y1);
    const bool in_a = inside(a, x, y);
    const bool in_b = inside(b, x, y);
    h.both += (in_a && in_b);
    h.either += (in_a || in_b);
  }
  return h;
}

void check_inputs(const Circle& a, const Circle& b, std::int64_t n) {
  validate_circle(a, "a");
  validate_circle(b, "b");
  if (n < 1000) throw Error("monte carlo oracle needs n >= 1000");
}

}  // namespace

McEstimate mc_intersection_area(const Circle& a, const Circle& b,
                                std::int64_t n, std::uint64_t seed) {
  check_inputs(a, b, n);
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  if (dx * dx + dy * dy >= (a.r + b.r) * (a.r + b.r)) return {0.0, 0.0};

  const Box box = bounding_box(a, b);
  const HitCounts h = sample(a, b, box, n, seed);
  const double p = static_cast<double>(h.both) / static_cast<double>(n);
  return {box.area() * p,
          box.area() * std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

McEstimate mc_gciou(const Circle& a, const Circle& b, std::int64_t n,
                    std::uint64_t seed) {
  check_inputs(a, b, n);
  const Box box = bounding_box(a, b);
  const HitCounts h = sample(a, b, box, n, seed);
  const double nn = static_cast<double>(n);
  const double p_i = static_cast<double>(h.both) / nn;
  const double p_u = static_cast<double>(h.either) / nn;

  const double d = std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y));
  const double radius_c = std::max({a.r, b.r, 0.5 * (d + a.r + b.r)});
  const double area_c = std::numbers::pi * radius_c * radius_c;

  // g(p_i, p_u) = p_i / p_u + B p_u / C - 1
  const double ratio = box.area() / area_c;
  const double g = p_i / p_u + ratio * p_u - 1.0;
  const double dg_di = 1.0 / p_u;
  const double dg_du = -p_i / (p_u * p_u) + ratio;
  const double var_i = p_i * (1.0 - p_i);
  const double var_u = p_u * (1.0 - p_u);
  const double cov = p_i * (1.0 - p_u);
  const double var = dg_di * dg_di * var_i + 2.0 * dg_di * dg_du * cov +
                     dg_du * dg_du * var_u;
  return {g, std::sqrt(std::max(0.0, var) / nn)};
}

Assignment brute_force_assignment(const CostMatrix& cost) {
  if (cost.rows > 8) {
    throw TooLarge("brute force assignment supports at most 8 rows, got " +
                   std::to_string(cost.rows));
  }
  if (cost.rows > cost.cols) throw ShapeError("brute force: rows exceed cols");
  for (double v : cost.data) {
    if (!std::isfinite(v)) throw NonFiniteCost("brute force: non-finite cost");
  }
  Assignment out;
  if (cost.rows == 0) return out;

  // Enumerate permutations of the columns; the first `rows` entries are the
  // row->column map. Many permutations share a prefix, which is harmless.
  std::vector<std::size_t> cols(cost.cols);
  std::iota(cols.begin(), cols.end(), 0);
  auto prefix_cost = [&](const std::vector<std::size_t>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < cost.rows; ++i) s += cost(i, p[i]);
    return s;
  };

  double best = prefix_cost(cols);
  do {
    best = std::min(best, prefix_cost(cols));
  } while (std::next_permutation(cols.begin(), cols.end()));

  // Permutations come out in lexicographic order, so the first within the
  // tie bound has the lexicographically smallest prefix.
  const double bound = best + tie_tolerance(best);
  std::iota(cols.begin(), cols.end(), 0);
  do {
    if (prefix_cost(cols) <= bound) {
      for (std::size_t i = 0; i < cost.rows; ++i) out.pairs.push_back({i, cols[i]});
      return out;
    }
  } while (std::next_permutation(cols.begin(), cols.end()));
  throw Error("brute force: no permutation within bound");
}

std::vector<double> finite_diff_grad(const ScalarFn& fn,
                                     std::span<const double> point, double h) {
  if (!(h > 0.0)) throw Error("finite_diff_grad: step must be positive");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double f_plus = fn(x);
    x[i] = saved - h;
    const double f_minus = fn(x);
    x[i] = saved;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      throw NonFiniteFunction("finite_diff_grad: non-finite value along axis " +
                              std::to_string(i));
    }
    grad[i] = (f_plus - f_minus) / (2.0 * h);
  }
  return grad;
}

}  // namespace circdet::oracle
