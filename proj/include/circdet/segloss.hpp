// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "circdet/circle.hpp"
#include "circdet/loss_config.hpp"
#include "circdet/mlp.hpp"

namespace circdet {

inline constexpr int kMaskSide = 28;
inline constexpr int kMaskCells = kMaskSide * kMaskSide;

/// Fixed 28x28 mask, row-major, values in [0,1].
struct MaskPatch {
  std::array<double, kMaskCells> cells{};

  double& at(int row, int col) { return cells[row * kMaskSide + col]; }
  double at(int row, int col) const { return cells[row * kMaskSide + col]; }

  static MaskPatch filled(double v) {
    MaskPatch m;
    m.cells.fill(v);
    return m;
  }

  friend bool operator==(const MaskPatch&, const MaskPatch&) = default;
};

/// Full-image binary mask, row-major.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t& at(int row, int col) { return data[row * width + col]; }
  std::uint8_t at(int row, int col) const { return data[row * width + col]; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// sigmoid(ffn2(ffn1(f) + f)) reshaped to 28x28. ffn1: D->D, ffn2: D->784.
MaskPatch mask_head(const Vec& f, const Mlp& ffn1, const Mlp& ffn2);

inline constexpr double kDiceSmooth = 1.0;
inline constexpr double kBceClamp = 1e-6;

/// 1 - (2 sum(m * mhat) + 1) / (sum(m) + sum(mhat) + 1).
double dice_loss(const MaskPatch& m, const MaskPatch& mhat);

/// Mean binary cross-entropy; mhat clamped to [1e-6, 1 - 1e-6].
double bce_loss(const MaskPatch& m, const MaskPatch& mhat);

/// lambda_dice * dice + lambda_bce * bce.
double seg_loss(const MaskPatch& m, const MaskPatch& mhat, const LossConfig& cfg);

/// Resamples the circle's bounding square (pixel units) onto 28x28, one
/// bilinear sample at each bin center. Pixel (i, j) covers
/// [j, j+1) x [i, i+1); samples outside the image read as 0.
///
/// Throws EmptyRegion when the square misses the image entirely.
MaskPatch circle_roi_crop(const BinaryMask& full_mask, const Circle& c);

}  // namespace circdet
