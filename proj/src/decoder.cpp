// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "circdet/errors.hpp"
#include "circdet/random.hpp"

namespace circdet {
namespace {

void check_matrix(const Mat& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError("decoder weights: " + name + " must be " + std::to_string(rows) + "x" +
                     std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
}

void check_mlp(const Mlp& m, int in, int out, const std::string& name) {
  if (m.layers().empty() || m.in_dim() != in || m.out_dim() != out) {
    throw ShapeError("decoder weights: " + name + " must map " + std::to_string(in) + " -> " +
                     std::to_string(out));
  }
}

// Numerically stable softmax in place.
void softmax(std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double& x : v) z += x = std::exp(x - mx);
  for (double& x : v) x /= z;
}

}  // namespace

DecoderWeights seeded_decoder_weights(int dim, int num_layers, int heads, int points,
                                      CdaInit init, std::uint64_t seed) {
  if (dim % 4 != 0 || dim % heads != 0) {
    throw ShapeError("decoder weights: D must be a multiple of 4 and of the head count");
  }
  std::uint64_t s = seed;
  auto next = [&s] { return s = splitmix64(s); };
  const int head_dim = dim / heads;

  DecoderWeights w;
  w.dim = dim;
  w.heads = heads;
  w.points = points;
  const int pos_dims[] = {3 * dim / 2, dim, dim};
  const int sq_dims[] = {dim, dim, dim};
  const int ref_dims[] = {3, dim, 1};
  const int delta_dims[] = {dim, dim, 3};
  w.pos_mlp = Mlp::seeded(pos_dims, next());
  w.csq_mlp = Mlp::seeded(sq_dims, next());
  w.ref_mlp = Mlp::seeded(ref_dims, next());
  w.delta_head = Mlp::seeded(delta_dims, next());
  w.score_weight = seeded_matrix(dim, 1, next()).col(0);
  w.score_bias = 0.0;

  for (int l = 0; l < num_layers; ++l) {
    DecoderLayerWeights layer;
    layer.self_q = seeded_matrix(dim, dim, next());
    layer.self_k = seeded_matrix(dim, dim, next());
    layer.self_v = seeded_matrix(dim, dim, next());
    layer.self_out = seeded_matrix(dim, dim, next());
    layer.cross_out = seeded_matrix(dim, dim, next());
    const int ffn_dims[] = {dim, dim, dim};
    layer.ffn = Mlp::seeded(ffn_dims, next());
    layer.attn_proj = seeded_matrix(heads * points, dim, next());
    layer.attn_bias = Vec::Zero(heads * points);
    for (int m = 0; m < heads; ++m) {
      layer.value_proj.push_back(seeded_matrix(head_dim, dim, next()));
      layer.output_proj.push_back(seeded_matrix(dim, head_dim, next()));
    }
    layer.offsets = cda_reference_init(init, heads, points, next());
    for (auto& v : layer.offsets.radius) v = static_cast<float>(v);
    for (auto& v : layer.offsets.angle) v = static_cast<float>(v);
    w.layers.push_back(std::move(layer));
  }
  return w;
}

void validate_decoder_weights(const DecoderWeights& w) {
  const int dim = w.dim;
  if (dim < 4 || dim % 4 != 0 || w.heads < 1 || w.points < 1 || dim % w.heads != 0) {
    throw ShapeError("decoder weights: inconsistent D / heads / points");
  }
  const int head_dim = dim / w.heads;
  const int mk = w.heads * w.points;
  check_mlp(w.pos_mlp, 3 * dim / 2, dim, "pos_mlp");
  check_mlp(w.csq_mlp, dim, dim, "csq_mlp");
  check_mlp(w.ref_mlp, 3, 1, "ref_mlp");
  check_mlp(w.delta_head, dim, 3, "delta_head");
  if (w.score_weight.size() != dim) throw ShapeError("decoder weights: score head must be D long");
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const auto& layer = w.layers[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    check_matrix(layer.self_q, dim, dim, p + "self_q");
    check_matrix(layer.self_k, dim, dim, p + "self_k");
    check_matrix(layer.self_v, dim, dim, p + "self_v");
    check_matrix(layer.self_out, dim, dim, p + "self_out");
    check_matrix(layer.cross_out, dim, dim, p + "cross_out");
    check_mlp(layer.ffn, dim, dim, p + "ffn");
    check_matrix(layer.attn_proj, mk, dim, p + "attn_proj");
    if (layer.attn_bias.size() != mk) throw ShapeError("decoder weights: " + p + "attn_bias");
    if (layer.value_proj.size() != static_cast<std::size_t>(w.heads) ||
        layer.output_proj.size() != static_cast<std::size_t>(w.heads)) {
      throw ShapeError("decoder weights: " + p + " needs one projection per head");
    }
    for (int m = 0; m < w.heads; ++m) {
      check_matrix(layer.value_proj[m], head_dim, dim, p + "value_proj");
      check_matrix(layer.output_proj[m], dim, head_dim, p + "output_proj");
    }
    if (layer.offsets.heads != w.heads || layer.offsets.points != w.points ||
        layer.offsets.radius.size() != static_cast<std::size_t>(mk) ||
        layer.offsets.angle.size() != static_cast<std::size_t>(mk)) {
      throw ShapeError("decoder weights: " + p + "offsets");
    }
  }
}

std::vector<CircleQuery> initial_queries(int count, int dim, double radius, std::uint64_t seed) {
  std::vector<CircleQuery> out;
  if (count <= 0) return out;
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    CircleQuery q;
    q.anchor = {(i % side + 0.5) / side, (i / side + 0.5) / side, radius};
    q.content.resize(dim);
    for (int c = 0; c < dim; ++c) q.content(c) = rng.uniform(-1.0, 1.0);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Vec> self_attention(const std::vector<CircleQuery>& queries,
                                const DecoderWeights& w, const DecoderLayerWeights& layer) {
  const std::size_t n = queries.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(w.dim));
  std::vector<Vec> q(n), k(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto in = self_attn_inputs(queries[i], w.pos_mlp, w.temperature);
    q[i] = layer.self_q * in.query;
    k[i] = layer.self_k * in.key;
    v[i] = layer.self_v * in.value;
  }
  std::vector<Vec> out(n);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) weights[j] = q[i].dot(k[j]) * scale;
    softmax(weights);
    Vec acc = Vec::Zero(w.dim);
    for (std::size_t j = 0; j < n; ++j) acc += weights[j] * v[j];
    out[i] = layer.self_out * acc;
  }
  return out;
}

Vec dense_cross_attention(const CircleQuery& q, double r_ref, const FeatureGrid& grid,
                          const DecoderWeights& w, const DecoderLayerWeights& layer) {
  const int dim = w.dim;
  Vec query = cross_attn_query(q, w.csq_mlp, dim, w.temperature);
  query.tail(dim) *= r_ref / q.anchor.r;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));

  const int cells = grid.height * grid.width;
  std::vector<double> weights(cells);
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      weights[row * grid.width + col] =
          query.dot(cross_attn_key(grid, row, col, w.temperature)) * scale;
    }
  }
  softmax(weights);
  Vec pooled = Vec::Zero(dim);
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      const auto cell = grid.cell(row, col);
      const double a = weights[row * grid.width + col];
      for (int c = 0; c < dim; ++c) pooled(c) += a * cell[c];
    }
  }
  return layer.cross_out * pooled;
}

DeformableParams deformable_params_for(const CircleQuery& q, const DecoderWeights& w,
                                       const DecoderLayerWeights& layer) {
  DeformableParams p;
  p.heads = w.heads;
  p.points = w.points;
  p.value_proj = layer.value_proj;
  p.output_proj = layer.output_proj;
  p.attention = softmax_heads(layer.attn_proj * q.content + layer.attn_bias, w.heads, w.points);
  p.offsets = layer.offsets;
  return p;
}

LayerOutput decoder_layer_forward(const std::vector<CircleQuery>& queries,
                                  const FeatureGrid& grid, const DecoderWeights& w,
                                  std::size_t layer_index, AttentionVariant variant) {
  validate_decoder_weights(w);
  validate_feature_grid(grid);
  if (layer_index >= w.layers.size()) {
    throw ShapeError("decoder: layer index " + std::to_string(layer_index) + " out of range");
  }
  if (grid.depth != w.dim) throw ShapeError("decoder: feature depth differs from D");
  for (const auto& q : queries) {
    if (q.content.size() != w.dim) throw ShapeError("decoder: query content must be D long");
  }
  const auto& layer = w.layers[layer_index];

  LayerOutput out;
  out.queries = queries;
  const auto self_update = self_attention(queries, w, layer);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto& q = out.queries[i];
    q.content += self_update[i];
    const double r_ref = reference_radius(q.anchor, w.ref_mlp);
    if (variant == AttentionVariant::kDense) {
      q.content += dense_cross_attention(q, r_ref, grid, w, layer);
    } else {
      q.content += circle_deformable_attention(q, deformable_params_for(q, w, layer), r_ref, grid);
    }
    q.content += layer.ffn.forward(q.content);
    const Vec d = w.delta_head.forward(q.content);
    const std::array<double, 3> delta{d(0), d(1), d(2)};
    q.anchor = refine_anchor(q.anchor, delta);
    out.deltas.push_back(delta);
  }
  return out;
}

double query_score(const CircleQuery& q, const DecoderWeights& w) {
  return sigmoid(w.score_weight.dot(q.content) + w.score_bias);
}

}  // namespace circdet
