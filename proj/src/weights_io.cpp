// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/weights_io.hpp"

#include <cmath>
#include <map>
#include <string>

#include "circdet/errors.hpp"

namespace circdet {
namespace {

FeatureGrid from_matrix(const Mat& m) {
  FeatureGrid t(static_cast<int>(m.rows()), static_cast<int>(m.cols()), 1);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.at(r, c, 0) = static_cast<float>(m(r, c));
  }
  return t;
}

FeatureGrid from_vector(const Vec& v) { return from_matrix(Mat(v)); }

Mat to_matrix(const FeatureGrid& t, const std::string& key) {
  if (t.depth != 1) throw ShapeError("weights: tensor '" + key + "' must have depth 1");
  Mat m(t.height, t.width);
  for (int r = 0; r < t.height; ++r) {
    for (int c = 0; c < t.width; ++c) m(r, c) = t.at(r, c, 0);
  }
  return m;
}

class TensorTable {
 public:
  explicit TensorTable(const NamedTensors& tensors) {
    for (const auto& [name, t] : tensors) table_.emplace(name, &t);
  }

  bool has(const std::string& key) const { return table_.contains(key); }

  const FeatureGrid& get(const std::string& key) const {
    const auto it = table_.find(key);
    if (it == table_.end()) throw FormatError("weights: missing tensor '" + key + "'");
    return *it->second;
  }

  Mat matrix(const std::string& key) const { return to_matrix(get(key), key); }

  Vec vector(const std::string& key) const {
    const Mat m = matrix(key);
    if (m.cols() != 1) throw ShapeError("weights: tensor '" + key + "' must be a column");
    return m.col(0);
  }

  Mlp mlp(const std::string& prefix) const {
    std::vector<DenseLayer> layers;
    // A layer with only one of its two tensors is an error, not the end.
    for (int i = 0;; ++i) {
      const std::string p = prefix + "." + std::to_string(i);
      if (!has(p + ".weight") && !has(p + ".bias")) break;
      layers.push_back({matrix(p + ".weight"), vector(p + ".bias")});
    }
    if (layers.empty()) throw FormatError("weights: missing MLP '" + prefix + "'");
    return Mlp(std::move(layers));
  }

 private:
  std::map<std::string, const FeatureGrid*> table_;
};

void put_mlp(NamedTensors& out, const std::string& prefix, const Mlp& m) {
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    const std::string p = prefix + "." + std::to_string(i);
    out.emplace_back(p + ".weight", from_matrix(m.layers()[i].weight));
    out.emplace_back(p + ".bias", from_vector(m.layers()[i].bias));
  }
}

int as_int(float v, const char* what) {
  if (!(v >= 0.0f) || v != std::floor(v)) {
    throw FormatError(std::string("weights: meta field '") + what + "' is not a count");
  }
  return static_cast<int>(v);
}

}  // namespace

NamedTensors decoder_weights_to_tensors(const DecoderWeights& w) {
  NamedTensors out;
  FeatureGrid meta(1, 1, 5);
  meta.data = {static_cast<float>(w.dim), static_cast<float>(w.heads),
               static_cast<float>(w.points), static_cast<float>(w.layers.size()),
               static_cast<float>(w.temperature)};
  out.emplace_back("meta", meta);
  put_mlp(out, "pos_mlp", w.pos_mlp);
  put_mlp(out, "csq_mlp", w.csq_mlp);
  put_mlp(out, "ref_mlp", w.ref_mlp);
  put_mlp(out, "delta_head", w.delta_head);
  out.emplace_back("score.weight", from_vector(w.score_weight));
  out.emplace_back("score.bias", FeatureGrid(1, 1, 1, static_cast<float>(w.score_bias)));
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const auto& layer = w.layers[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    out.emplace_back(p + "self_q", from_matrix(layer.self_q));
    out.emplace_back(p + "self_k", from_matrix(layer.self_k));
    out.emplace_back(p + "self_v", from_matrix(layer.self_v));
    out.emplace_back(p + "self_out", from_matrix(layer.self_out));
    out.emplace_back(p + "cross_out", from_matrix(layer.cross_out));
    put_mlp(out, p + "ffn", layer.ffn);
    out.emplace_back(p + "attn_proj", from_matrix(layer.attn_proj));
    out.emplace_back(p + "attn_bias", from_vector(layer.attn_bias));
    for (std::size_t m = 0; m < layer.value_proj.size(); ++m) {
      out.emplace_back(p + "value_proj." + std::to_string(m), from_matrix(layer.value_proj[m]));
      out.emplace_back(p + "output_proj." + std::to_string(m), from_matrix(layer.output_proj[m]));
    }
    const auto mk = static_cast<int>(layer.offsets.radius.size());
    FeatureGrid offsets(mk, 2, 1);
    for (int k = 0; k < mk; ++k) {
      offsets.at(k, 0, 0) = static_cast<float>(layer.offsets.radius[k]);
      offsets.at(k, 1, 0) = static_cast<float>(layer.offsets.angle[k]);
    }
    out.emplace_back(p + "offsets", offsets);
  }
  return out;
}

DecoderWeights decoder_weights_from_tensors(const NamedTensors& tensors) {
  const TensorTable t(tensors);
  const FeatureGrid& meta = t.get("meta");
  if (meta.data.size() != 5) throw FormatError("weights: meta must hold 5 values");
  DecoderWeights w;
  w.dim = as_int(meta.data[0], "dim");
  w.heads = as_int(meta.data[1], "heads");
  w.points = as_int(meta.data[2], "points");
  const int num_layers = as_int(meta.data[3], "layers");
  w.temperature = meta.data[4];
  w.pos_mlp = t.mlp("pos_mlp");
  w.csq_mlp = t.mlp("csq_mlp");
  w.ref_mlp = t.mlp("ref_mlp");
  w.delta_head = t.mlp("delta_head");
  w.score_weight = t.vector("score.weight");
  w.score_bias = t.get("score.bias").data.at(0);
  for (int l = 0; l < num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    DecoderLayerWeights layer;
    layer.self_q = t.matrix(p + "self_q");
    layer.self_k = t.matrix(p + "self_k");
    layer.self_v = t.matrix(p + "self_v");
    layer.self_out = t.matrix(p + "self_out");
    layer.cross_out = t.matrix(p + "cross_out");
    layer.ffn = t.mlp(p + "ffn");
    layer.attn_proj = t.matrix(p + "attn_proj");
    layer.attn_bias = t.vector(p + "attn_bias");
    for (int m = 0; m < w.heads; ++m) {
      layer.value_proj.push_back(t.matrix(p + "value_proj." + std::to_string(m)));
      layer.output_proj.push_back(t.matrix(p + "output_proj." + std::to_string(m)));
    }
    const Mat offsets = t.matrix(p + "offsets");
    if (offsets.cols() != 2) throw ShapeError("weights: " + p + "offsets must be MK x 2");
    layer.offsets.heads = w.heads;
    layer.offsets.points = w.points;
    for (Eigen::Index k = 0; k < offsets.rows(); ++k) {
      layer.offsets.radius.push_back(offsets(k, 0));
      layer.offsets.angle.push_back(offsets(k, 1));
    }
    w.layers.push_back(std::move(layer));
  }
  validate_decoder_weights(w);
  return w;
}

void save_decoder_weights(const std::filesystem::path& path, const DecoderWeights& w) {
  save_fgrc(path, decoder_weights_to_tensors(w));
}

DecoderWeights load_decoder_weights(const std::filesystem::path& path) {
  return decoder_weights_from_tensors(load_fgrc(path));
}

}  // namespace circdet
