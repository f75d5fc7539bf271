// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "circdet/attention.hpp"

namespace circdet {

enum class AttentionVariant { kDense, kDeformable };

/// Parameters owned by one decoder layer.
struct DecoderLayerWeights {
  Mat self_q, self_k, self_v, self_out;  // D x D
  Mat cross_out;                         // D x D, dense variant only
  Mlp ffn;                               // D -> D
  Mat attn_proj;                         // MK x D, deformable attention logits
  Vec attn_bias;                         // MK
  std::vector<Mat> value_proj;           // per head, d x D
  std::vector<Mat> output_proj;          // per head, D x d
  PolarOffsets offsets;
};

/// Full weight bundle. The positional / csq / reference-radius MLPs and the
/// prediction heads are shared by every layer.
struct DecoderWeights {
  int dim = 32;
  int heads = 8;
  int points = 4;
  double temperature = kPeTemperature;
  Mlp pos_mlp;     // 3D/2 -> D
  Mlp csq_mlp;     // D -> D
  Mlp ref_mlp;     // 3 -> 1
  Mlp delta_head;  // D -> 3
  Vec score_weight;
  double score_bias = 0.0;
  std::vector<DecoderLayerWeights> layers;
};

/// Seeded bundle with `num_layers` layers; offsets initialized per `init`.
DecoderWeights seeded_decoder_weights(int dim, int num_layers, int heads, int points,
                                      CdaInit init, std::uint64_t seed);

/// Throws ShapeError unless every block matches dim / heads / points.
void validate_decoder_weights(const DecoderWeights& w);

/// Queries on a uniform grid of centers with radius `radius`; seeded content
/// in [-1, 1).
std::vector<CircleQuery> initial_queries(int count, int dim, double radius,
                                         std::uint64_t seed);

/// Single-head scaled dot-product attention among the queries; returns the
/// residual update (before adding to Z).
std::vector<Vec> self_attention(const std::vector<CircleQuery>& queries,
                                const DecoderWeights& w, const DecoderLayerWeights& layer);

/// Dense cross attention over every grid cell. Logits are
/// [Z.F + (r_ref / r) (PE(x_key, y_key) . (PE(x_ref, y_ref) * csq(Z)))] / sqrt(D),
/// i.e. the content dot product plus the circle-modulated positional term.
/// Returns cross_out * sum_p softmax_p * F_p.
Vec dense_cross_attention(const CircleQuery& q, double r_ref, const FeatureGrid& grid,
                          const DecoderWeights& w, const DecoderLayerWeights& layer);

/// Deformable parameters for one query (attention weights depend on Z).
DeformableParams deformable_params_for(const CircleQuery& q, const DecoderWeights& w,
                                       const DecoderLayerWeights& layer);

struct LayerOutput {
  std::vector<CircleQuery> queries;
  std::vector<std::array<double, 3>> deltas;
};

/// self attention -> cross attention -> feed-forward -> anchor refinement,
/// each with a residual connection on the content vector.
LayerOutput decoder_layer_forward(const std::vector<CircleQuery>& queries,
                                  const FeatureGrid& grid, const DecoderWeights& w,
                                  std::size_t layer_index, AttentionVariant variant);

/// sigmoid(score_weight . Z + score_bias).
double query_score(const CircleQuery& q, const DecoderWeights& w);

}  // namespace circdet
