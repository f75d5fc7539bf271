// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "circdet/circle.hpp"
#include "circdet/feature_grid.hpp"
#include "circdet/mlp.hpp"

namespace circdet {

inline constexpr double kPeTemperature = 20.0;

/// Interleaved (sin(2 pi t / w_j), cos(2 pi t / w_j)) with
/// w_j = temperature^(j / half_dim), j = 0..half_dim-1.
Vec sinusoidal_pe(double t, int half_dim, double temperature = kPeTemperature);

/// Concat(PE(x), PE(y)), each D/2 long. D must be a multiple of 4.
Vec pe_xy(double x, double y, int dim, double temperature = kPeTemperature);

/// Concat(PE(x), PE(y), PE(r)), length 3D/2. Accepts r = 0; rejects
/// negative or non-finite fields with InvalidCircle.
Vec pe_circle(const Circle& c, int dim, double temperature = kPeTemperature);

/// A decoder query: content vector plus anchor circle in normalized units.
struct CircleQuery {
  Vec content;
  Circle anchor;
};

/// MLP(PE(anchor)); the MLP maps 3D/2 -> D.
Vec positional_query(const Circle& anchor, const Mlp& mlp,
                     double temperature = kPeTemperature);

struct SelfAttnInputs {
  Vec query, key, value;
};

/// Q = K = Z + P, V = Z.
SelfAttnInputs self_attn_inputs(const CircleQuery& q, const Mlp& mlp,
                                double temperature = kPeTemperature);

/// Concat(Z, PE(x, y) * csq(Z)), length 2D.
Vec cross_attn_query(const CircleQuery& q, const Mlp& csq_mlp, int dim,
                     double temperature = kPeTemperature);

/// Normalized center of grid cell (row, col): ((col + 0.5) / W, (row + 0.5) / H).
std::array<double, 2> pixel_center(int row, int col, int height, int width);

/// Concat(F[row, col], PE(x, y)) at the cell's normalized center, length 2D.
Vec cross_attn_key(const FeatureGrid& grid, int row, int col,
                   double temperature = kPeTemperature);

/// Circle-modulated positional score between a key at normalized (x, y) and
/// the query's anchor center:
///   (PE(x).PE(x_ref) + PE(y).PE(y_ref)) / sqrt(D) * (r_ref / r).
double modulated_attention(double key_x, double key_y, const CircleQuery& q,
                           double r_ref, int dim,
                           double temperature = kPeTemperature);

/// sigmoid(MLP(x, y, r)); the MLP maps 3 -> 1.
double reference_radius(const Circle& anchor, const Mlp& mlp);

enum class CdaInit { kRandom, kCircle };

/// Polar sampling offsets, head-major: entry m * points + k.
struct PolarOffsets {
  int heads = 0;
  int points = 0;
  std::vector<double> radius;  // in [0, 1]
  std::vector<double> angle;   // radians in [0, 2 pi)
};

/// kRandom: seeded uniform points in the unit disk (r = sqrt(u), theta = 2 pi v).
/// kCircle: sunflower layout, point k of M*K at r = sqrt((k + 0.5) / MK),
/// theta = k * golden angle, split sequentially into heads. Seed is unused.
PolarOffsets cda_reference_init(CdaInit mode, int heads, int points,
                                std::uint64_t seed);

/// Bilinear lookup at continuous cell coordinates (x = column, y = row);
/// coordinates are clamped to the grid.
Vec bilinear_sample(const FeatureGrid& grid, double x, double y);

struct DeformableParams {
  int heads = 8;
  int points = 4;
  std::vector<Mat> value_proj;   // per head, d x D
  std::vector<Mat> output_proj;  // per head, D x d
  std::vector<double> attention; // per head softmax-normalized, head-major
  PolarOffsets offsets;
};

/// Per-head softmax of head-major logits.
std::vector<double> softmax_heads(const Vec& logits, int heads, int points);

struct SamplePoint {
  double x = 0.0;  // continuous column coordinate
  double y = 0.0;  // continuous row coordinate
};

/// Unclamped sampling locations: anchor center in cell coordinates plus
/// delta_r * r_ref * r_pixels * (cos theta, sin theta), r_pixels = r * min(H, W).
std::vector<SamplePoint> deformable_sample_points(const Circle& anchor,
                                                  const PolarOffsets& offsets,
                                                  double r_ref, int height,
                                                  int width);

/// sum_m W_m sum_k A_mk W'_m F(p_mk).
///
/// Throws ShapeError for inconsistent shapes and NonNormalizedAttention if a
/// head's weights do not sum to 1 within 1e-6.
Vec circle_deformable_attention(const CircleQuery& q, const DeformableParams& params,
                                double r_ref, const FeatureGrid& grid);

inline constexpr double kInverseSigmoidClamp = 1e-5;
/// Refined coordinates are kept inside [1e-12, 1 - 1e-12].
inline constexpr double kAnchorClamp = 1e-12;

/// log(t / (1 - t)) with t clamped to [1e-5, 1 - 1e-5].
double inverse_sigmoid(double t);

/// Per coordinate sigmoid(inverse_sigmoid(c) + delta).
Circle refine_anchor(const Circle& anchor, const std::array<double, 3>& delta);

}  // namespace circdet
