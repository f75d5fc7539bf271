// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/segloss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "circdet/errors.hpp"

namespace circdet {

void validate_loss_config(const LossConfig& cfg) {
  const double weights[] = {cfg.lambda_focal_match, cfg.lambda_focal_loss,
                            cfg.lambda_gciou,       cfg.lambda_c,
                            cfg.lambda_dice,        cfg.lambda_bce};
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("loss config: weights must be finite and >= 0");
  }
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw Error("loss config: alpha outside [0,1]");
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) throw Error("loss config: gamma must be >= 0");
}

MaskPatch mask_head(const Vec& f, const Mlp& ffn1, const Mlp& ffn2) {
  if (ffn1.in_dim() != f.size() || ffn1.out_dim() != f.size()) {
    throw ShapeError("mask_head: first FFN must map D -> D with D = " +
                     std::to_string(f.size()));
  }
  if (ffn2.in_dim() != f.size() || ffn2.out_dim() != kMaskCells) {
    throw ShapeError("mask_head: second FFN must map D -> 784");
  }
  const Vec logits = ffn2.forward(ffn1.forward(f) + f);
  MaskPatch out;
  for (int i = 0; i < kMaskCells; ++i) out.cells[i] = sigmoid(logits(i));
  return out;
}

double dice_loss(const MaskPatch& m, const MaskPatch& mhat) {
  double inter = 0.0, sum_m = 0.0, sum_hat = 0.0;
  for (int i = 0; i < kMaskCells; ++i) {
    inter += m.cells[i] * mhat.cells[i];
    sum_m += m.cells[i];
    sum_hat += mhat.cells[i];
  }
  return 1.0 - (2.0 * inter + kDiceSmooth) / (sum_m + sum_hat + kDiceSmooth);
}

double bce_loss(const MaskPatch& m, const MaskPatch& mhat) {
  double total = 0.0;
  for (int i = 0; i < kMaskCells; ++i) {
    const double p = std::clamp(mhat.cells[i], kBceClamp, 1.0 - kBceClamp);
    const double t = m.cells[i];
    total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  return total / kMaskCells;
}

double seg_loss(const MaskPatch& m, const MaskPatch& mhat, const LossConfig& cfg) {
  return cfg.lambda_dice * dice_loss(m, mhat) + cfg.lambda_bce * bce_loss(m, mhat);
}

namespace {

// Bilinear read at continuous image coordinates (u, v); 0 outside the image.
double sample_mask(const BinaryMask& mask, double u, double v) {
  if (u < 0.0 || v < 0.0 || u > mask.width || v > mask.height) return 0.0;
  const double fx = std::clamp(u - 0.5, 0.0, static_cast<double>(mask.width - 1));
  const double fy = std::clamp(v - 0.5, 0.0, static_cast<double>(mask.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, mask.width - 1);
  const int y1 = std::min(y0 + 1, mask.height - 1);
  const double wx = fx - x0;
  const double wy = fy - y0;
  const double top = (1.0 - wx) * mask.at(y0, x0) + wx * mask.at(y0, x1);
  const double bottom = (1.0 - wx) * mask.at(y1, x0) + wx * mask.at(y1, x1);
  return (1.0 - wy) * top + wy * bottom;
}

}  // namespace

MaskPatch circle_roi_crop(const BinaryMask& full_mask, const Circle& c) {
  validate_circle(c);
  if (full_mask.height <= 0 || full_mask.width <= 0 ||
      full_mask.data.size() != static_cast<std::size_t>(full_mask.height) * full_mask.width) {
    throw ShapeError("circle_roi_crop: malformed mask");
  }
  const double x0 = c.x - c.r;
  const double y0 = c.y - c.r;
  if (c.x + c.r <= 0.0 || c.y + c.r <= 0.0 || x0 >= full_mask.width ||
      y0 >= full_mask.height) {
    throw EmptyRegion("circle_roi_crop: bounding square lies outside the image");
  }
  const double bin = 2.0 * c.r / kMaskSide;
  MaskPatch out;
  for (int row = 0; row < kMaskSide; ++row) {
    const double v = y0 + (row + 0.5) * bin;
    for (int col = 0; col < kMaskSide; ++col) {
      out.at(row, col) = sample_mask(full_mask, x0 + (col + 0.5) * bin, v);
    }
  }
  return out;
}

}  // namespace circdet
