// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/mlp.hpp"

#include <cmath>
#include <string>

#include "circdet/errors.hpp"
#include "circdet/random.hpp"

namespace circdet {
namespace {

double init_value(Rng& rng, int fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
}

}  // namespace

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("mlp: no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.size() != l.weight.rows()) {
      throw ShapeError("mlp: bias length mismatch in layer " + std::to_string(i));
    }
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows()) {
      throw ShapeError("mlp: layer " + std::to_string(i) +
                       " input does not chain with previous output");
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw ShapeError("mlp: non-finite parameter in layer " + std::to_string(i));
    }
  }
}

Mlp Mlp::zeros(std::span<const int> dims) {
  if (dims.size() < 2) throw ShapeError("mlp: need at least in/out dims");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.push_back({Mat::Zero(dims[i + 1], dims[i]), Vec::Zero(dims[i + 1])});
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::seeded(std::span<const int> dims, std::uint64_t seed) {
  Mlp m = zeros(dims);
  Rng rng(seed);
  for (auto& l : m.layers_) {
    const int fan_in = static_cast<int>(l.weight.cols());
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        l.weight(r, c) = init_value(rng, fan_in);
      }
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = init_value(rng, fan_in);
  }
  return m;
}

Mat seeded_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = init_value(rng, cols);
  }
  return m;
}

Vec Mlp::forward(const Vec& input) const {
  if (layers_.empty()) throw ShapeError("mlp: no layers");
  if (input.size() != in_dim()) {
    throw ShapeError("mlp: expected input of length " + std::to_string(in_dim()) +
                     ", got " + std::to_string(input.size()));
  }
  Vec h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].weight * h + layers_[i].bias;
    if (i + 1 < layers_.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

int Mlp::in_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Mlp::out_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

}  // namespace circdet
