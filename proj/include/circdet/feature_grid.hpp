// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace circdet {

/// H x W x D float tensor, row-major, channel-last. Used for encoder feature
/// maps as well as raw weight / mask tensors (where D may be 1).
struct FeatureGrid {
  int height = 0;
  int width = 0;
  int depth = 0;
  std::vector<float> data;

  FeatureGrid() = default;
  FeatureGrid(int h, int w, int d, float fill = 0.0f)
      : height(h), width(w), depth(d),
        data(static_cast<std::size_t>(h) * w * d, fill) {}

  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width + col) * depth + ch;
  }
  float& at(int row, int col, int ch) { return data[index(row, col, ch)]; }
  float at(int row, int col, int ch) const { return data[index(row, col, ch)]; }

  std::span<const float> cell(int row, int col) const {
    return {data.data() + index(row, col, 0), static_cast<std::size_t>(depth)};
  }

  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;
};

/// Throws ShapeError unless H, W, D >= 1, D is even, the buffer matches the
/// shape and every value is finite.
void validate_feature_grid(const FeatureGrid& grid);

}  // namespace circdet
