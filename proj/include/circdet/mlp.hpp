// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace circdet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct DenseLayer {
  Mat weight;  // out x in
  Vec bias;    // out
};

/// Fully connected stack, ReLU between layers and nothing after the last.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  /// Layer widths {in, hidden..., out}, all weights and biases zero.
  static Mlp zeros(std::span<const int> dims);

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases included. Values
  /// are rounded to float precision so they survive a tensor-file round trip.
  static Mlp seeded(std::span<const int> dims, std::uint64_t seed);

  Vec forward(const Vec& input) const;

  int in_dim() const;
  int out_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// Seeded matrix with the same init rule as Mlp::seeded.
Mat seeded_matrix(int rows, int cols, std::uint64_t seed);

}  // namespace circdet
