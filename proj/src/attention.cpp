// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "circdet/errors.hpp"
#include "circdet/random.hpp"

namespace circdet {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_dim(int dim) {
  if (dim < 4 || dim % 4 != 0) {
    throw ShapeError("positional encoding needs D to be a positive multiple of 4, got " +
                     std::to_string(dim));
  }
}

}  // namespace

void validate_feature_grid(const FeatureGrid& grid) {
  if (grid.height < 1 || grid.width < 1 || grid.depth < 1) {
    throw ShapeError("feature grid dimensions must be >= 1");
  }
  if (grid.depth % 2 != 0) throw ShapeError("feature grid depth must be even");
  if (grid.data.size() != static_cast<std::size_t>(grid.height) * grid.width * grid.depth) {
    throw ShapeError("feature grid buffer does not match its shape");
  }
  for (float v : grid.data) {
    if (!std::isfinite(v)) throw ShapeError("feature grid holds a non-finite value");
  }
}

Vec sinusoidal_pe(double t, int half_dim, double temperature) {
  if (half_dim < 1) throw ShapeError("sinusoidal_pe: half_dim must be >= 1");
  Vec out(2 * half_dim);
  for (int j = 0; j < half_dim; ++j) {
    const double omega = std::pow(temperature, static_cast<double>(j) / half_dim);
    const double phase = t * kTwoPi / omega;
    out(2 * j) = std::sin(phase);
    out(2 * j + 1) = std::cos(phase);
  }
  return out;
}

Vec pe_xy(double x, double y, int dim, double temperature) {
  require_dim(dim);
  Vec out(dim);
  out << sinusoidal_pe(x, dim / 4, temperature), sinusoidal_pe(y, dim / 4, temperature);
  return out;
}

Vec pe_circle(const Circle& c, int dim, double temperature) {
  if (!is_finite(c) || c.r < 0.0) throw InvalidCircle("pe_circle: invalid circle");
  require_dim(dim);
  const int half = dim / 4;
  Vec out(3 * dim / 2);
  out << sinusoidal_pe(c.x, half, temperature), sinusoidal_pe(c.y, half, temperature),
      sinusoidal_pe(c.r, half, temperature);
  return out;
}

Vec positional_query(const Circle& anchor, const Mlp& mlp, double temperature) {
  const int dim = mlp.out_dim();
  if (mlp.in_dim() != 3 * dim / 2 || dim % 4 != 0) {
    throw ShapeError("positional_query: MLP must map 3D/2 -> D");
  }
  return mlp.forward(pe_circle(anchor, dim, temperature));
}

SelfAttnInputs self_attn_inputs(const CircleQuery& q, const Mlp& mlp, double temperature) {
  const Vec pos = positional_query(q.anchor, mlp, temperature);
  if (pos.size() != q.content.size()) {
    throw ShapeError("self_attn_inputs: content and positional dims differ");
  }
  const Vec qk = q.content + pos;
  return {qk, qk, q.content};
}

Vec cross_attn_query(const CircleQuery& q, const Mlp& csq_mlp, int dim, double temperature) {
  if (q.content.size() != dim || csq_mlp.in_dim() != dim || csq_mlp.out_dim() != dim) {
    throw ShapeError("cross_attn_query: content and csq MLP must be D-dimensional");
  }
  Vec out(2 * dim);
  out << q.content,
      pe_xy(q.anchor.x, q.anchor.y, dim, temperature).cwiseProduct(csq_mlp.forward(q.content));
  return out;
}

std::array<double, 2> pixel_center(int row, int col, int height, int width) {
  return {(col + 0.5) / width, (row + 0.5) / height};
}

Vec cross_attn_key(const FeatureGrid& grid, int row, int col, double temperature) {
  const int dim = grid.depth;
  const auto [x, y] = pixel_center(row, col, grid.height, grid.width);
  Vec out(2 * dim);
  const auto cell = grid.cell(row, col);
  for (int c = 0; c < dim; ++c) out(c) = cell[c];
  out.tail(dim) = pe_xy(x, y, dim, temperature);
  return out;
}

double modulated_attention(double key_x, double key_y, const CircleQuery& q,
                           double r_ref, int dim, double temperature) {
  validate_circle(q.anchor, "query anchor");
  require_dim(dim);
  const int half = dim / 4;
  const double dot = sinusoidal_pe(key_x, half, temperature).dot(sinusoidal_pe(q.anchor.x, half, temperature)) +
                     sinusoidal_pe(key_y, half, temperature).dot(sinusoidal_pe(q.anchor.y, half, temperature));
  const double base = dot / std::sqrt(static_cast<double>(dim));
  return base * (r_ref / q.anchor.r);
}

double reference_radius(const Circle& anchor, const Mlp& mlp) {
  if (mlp.in_dim() != 3 || mlp.out_dim() != 1) {
    throw ShapeError("reference_radius: MLP must map 3 -> 1");
  }
  Vec in(3);
  in << anchor.x, anchor.y, anchor.r;
  return sigmoid(mlp.forward(in)(0));
}

PolarOffsets cda_reference_init(CdaInit mode, int heads, int points, std::uint64_t seed) {
  if (heads < 1 || points < 1) throw ShapeError("cda_reference_init: heads and points must be >= 1");
  PolarOffsets out{heads, points, {}, {}};
  const int total = heads * points;
  out.radius.resize(total);
  out.angle.resize(total);
  if (mode == CdaInit::kRandom) {
    Rng rng(seed);
    for (int k = 0; k < total; ++k) {
      out.radius[k] = std::sqrt(rng.uniform());
      out.angle[k] = kTwoPi * rng.uniform();
    }
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < total; ++k) {
      out.radius[k] = std::sqrt((k + 0.5) / total);
      out.angle[k] = std::fmod(k * golden, kTwoPi);
    }
  }
  return out;
}

Vec bilinear_sample(const FeatureGrid& grid, double x, double y) {
  const double fx = std::clamp(x, 0.0, static_cast<double>(grid.width - 1));
  const double fy = std::clamp(y, 0.0, static_cast<double>(grid.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, grid.width - 1);
  const int y1 = std::min(y0 + 1, grid.height - 1);
  const double wx = fx - x0;
  const double wy = fy - y0;
  const double w00 = (1.0 - wx) * (1.0 - wy), w01 = wx * (1.0 - wy);
  const double w10 = (1.0 - wx) * wy, w11 = wx * wy;
  Vec out(grid.depth);
  for (int c = 0; c < grid.depth; ++c) {
    out(c) = w00 * grid.at(y0, x0, c) + w01 * grid.at(y0, x1, c) +
             w10 * grid.at(y1, x0, c) + w11 * grid.at(y1, x1, c);
  }
  return out;
}

std::vector<double> softmax_heads(const Vec& logits, int heads, int points) {
  if (logits.size() != heads * points) throw ShapeError("softmax_heads: wrong logit count");
  std::vector<double> out(logits.size());
  for (int m = 0; m < heads; ++m) {
    const auto seg = logits.segment(m * points, points);
    const double mx = seg.maxCoeff();
    double z = 0.0;
    for (int k = 0; k < points; ++k) z += out[m * points + k] = std::exp(seg(k) - mx);
    for (int k = 0; k < points; ++k) out[m * points + k] /= z;
  }
  return out;
}

std::vector<SamplePoint> deformable_sample_points(const Circle& anchor,
                                                  const PolarOffsets& offsets,
                                                  double r_ref, int height, int width) {
  const double cx = anchor.x * width - 0.5;
  const double cy = anchor.y * height - 0.5;
  const double scale = r_ref * anchor.r * std::min(height, width);
  std::vector<SamplePoint> pts(offsets.radius.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double rho = offsets.radius[i] * scale;
    pts[i] = {cx + rho * std::cos(offsets.angle[i]), cy + rho * std::sin(offsets.angle[i])};
  }
  return pts;
}

Vec circle_deformable_attention(const CircleQuery& q, const DeformableParams& params,
                                double r_ref, const FeatureGrid& grid) {
  const int dim = grid.depth;
  const int heads = params.heads;
  const int points = params.points;
  if (heads < 1 || points < 1 || dim % heads != 0) {
    throw ShapeError("deformable attention: D must be divisible by the head count");
  }
  const int head_dim = dim / heads;
  const auto total = static_cast<std::size_t>(heads * points);
  if (q.content.size() != dim || params.value_proj.size() != static_cast<std::size_t>(heads) ||
      params.output_proj.size() != static_cast<std::size_t>(heads) ||
      params.attention.size() != total || params.offsets.radius.size() != total ||
      params.offsets.angle.size() != total) {
    throw ShapeError("deformable attention: parameter shapes do not match M, K, D");
  }
  for (int m = 0; m < heads; ++m) {
    if (params.value_proj[m].rows() != head_dim || params.value_proj[m].cols() != dim ||
        params.output_proj[m].rows() != dim || params.output_proj[m].cols() != head_dim) {
      throw ShapeError("deformable attention: projection shape mismatch in head " +
                       std::to_string(m));
    }
    double sum = 0.0;
    for (int k = 0; k < points; ++k) sum += params.attention[m * points + k];
    if (std::abs(sum - 1.0) > 1e-6) {
      throw NonNormalizedAttention("deformable attention: head " + std::to_string(m) +
                                   " weights sum to " + std::to_string(sum));
    }
  }
  validate_circle(q.anchor, "query anchor");

  const auto pts = deformable_sample_points(q.anchor, params.offsets, r_ref,
                                            grid.height, grid.width);
  Vec out = Vec::Zero(dim);
  for (int m = 0; m < heads; ++m) {
    Vec pooled = Vec::Zero(dim);
    for (int k = 0; k < points; ++k) {
      const auto& p = pts[m * points + k];
      pooled += params.attention[m * points + k] * bilinear_sample(grid, p.x, p.y);
    }
    out += params.output_proj[m] * (params.value_proj[m] * pooled);
  }
  return out;
}

double inverse_sigmoid(double t) {
  t = std::clamp(t, kInverseSigmoidClamp, 1.0 - kInverseSigmoidClamp);
  return std::log(t / (1.0 - t));
}

Circle refine_anchor(const Circle& anchor, const std::array<double, 3>& delta) {
  const double coords[3] = {anchor.x, anchor.y, anchor.r};
  double out[3];
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(coords[i]) || coords[i] <= 0.0 || coords[i] >= 1.0) {
      throw InvalidCircle("refine_anchor: anchor must lie in (0,1)^3");
    }
    if (!std::isfinite(delta[i])) throw InvalidCircle("refine_anchor: non-finite delta");
    out[i] = std::clamp(sigmoid(inverse_sigmoid(coords[i]) + delta[i]), kAnchorClamp,
                        1.0 - kAnchorClamp);
  }
  return {out[0], out[1], out[2]};
}

}  // namespace circdet
