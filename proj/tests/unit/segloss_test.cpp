// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "circdet/errors.hpp"
#include "circdet/random.hpp"
#include "circdet/segloss.hpp"
#include "circdet/synthgen.hpp"

namespace circdet {
namespace {

MaskPatch binary_patch(int positives, int offset = 0) {
  MaskPatch m;
  for (int k = 0; k < positives; ++k) m.cells[offset + k] = 1.0;
  return m;
}

MaskPatch random_patch(Rng& rng, bool binary) {
  MaskPatch m;
  for (auto& v : m.cells) v = binary ? (rng.uniform() < 0.5 ? 1.0 : 0.0) : rng.uniform();
  return m;
}

TEST(MaskHead, ZeroWeightsGiveHalf) {
  const int d = 16;
  const int dims1[] = {d, d}, dims2[] = {d, kMaskCells};
  const MaskPatch m = mask_head(Vec::Ones(d), Mlp::zeros(dims1), Mlp::zeros(dims2));
  for (double v : m.cells) ASSERT_EQ(v, 0.5);
}

TEST(MaskHead, ShapeErrors) {
  const int d = 16;
  const int ok1[] = {d, d}, ok2[] = {d, kMaskCells}, bad1[] = {d, d + 1}, bad2[] = {d, 100};
  EXPECT_THROW(mask_head(Vec::Ones(d), Mlp::zeros(bad1), Mlp::zeros(ok2)), ShapeError);
  EXPECT_THROW(mask_head(Vec::Ones(d), Mlp::zeros(ok1), Mlp::zeros(bad2)), ShapeError);
  EXPECT_THROW(mask_head(Vec::Ones(d + 2), Mlp::zeros(ok1), Mlp::zeros(ok2)), ShapeError);
}

TEST(MaskHead, MatchesIndependentComposition) {
  const int d = 8;
  const int dims1[] = {d, 12, d}, dims2[] = {d, kMaskCells};
  const Mlp f1 = Mlp::seeded(dims1, 21), f2 = Mlp::seeded(dims2, 22);
  Vec f(d);
  for (int i = 0; i < d; ++i) f(i) = 0.3 * i - 1.0;

  // Hand-rolled loops over the stored weights.
  auto dense = [](const DenseLayer& l, const std::vector<double>& x, bool relu) {
    std::vector<double> y(l.weight.rows());
    for (int o = 0; o < l.weight.rows(); ++o) {
      double s = l.bias(o);
      for (int i = 0; i < l.weight.cols(); ++i) s += l.weight(o, i) * x[i];
      y[o] = relu ? std::max(0.0, s) : s;
    }
    return y;
  };
  std::vector<double> x(f.data(), f.data() + d);
  auto h = dense(f1.layers()[0], x, true);
  h = dense(f1.layers()[1], h, false);
  for (int i = 0; i < d; ++i) h[i] += x[i];
  const auto logits = dense(f2.layers()[0], h, false);

  const MaskPatch m = mask_head(f, f1, f2);
  for (int k = 0; k < kMaskCells; ++k) ASSERT_NEAR(m.cells[k], 1.0 / (1.0 + std::exp(-logits[k])), 1e-12);
}

TEST(DiceLoss, Examples) {
  EXPECT_EQ(dice_loss(binary_patch(100), binary_patch(100)), 0.0);
  EXPECT_NEAR(dice_loss(binary_patch(50, 0), binary_patch(50, 50)), 1.0 - 1.0 / 101.0, 1e-12);
  EXPECT_NEAR(dice_loss(binary_patch(50, 0), binary_patch(50, 50)), 0.9900990099, 1e-9);
  EXPECT_EQ(dice_loss(MaskPatch{}, MaskPatch{}), 0.0);
}

TEST(BceLoss, Examples) {
  const MaskPatch m = binary_patch(300);
  EXPECT_NEAR(bce_loss(m, m), -std::log(1 - 1e-6), 1e-15);
  EXPECT_LT(bce_loss(m, m), 2e-6);
  Rng rng(1);
  const MaskPatch half = MaskPatch::filled(0.5);
  for (int t = 0; t < 5; ++t) EXPECT_NEAR(bce_loss(random_patch(rng, true), half), std::log(2.0), 1e-12);
}

TEST(BceLoss, CellwiseSeed5) {
  Rng rng(5);
  const MaskPatch m = random_patch(rng, true), mh = random_patch(rng, false);
  double sum = 0.0;
  for (int k = 0; k < kMaskCells; ++k) {
    const double p = std::min(std::max(mh.cells[k], 1e-6), 1 - 1e-6);
    sum += m.cells[k] > 0.5 ? -std::log(p) : -std::log(1 - p);
  }
  EXPECT_NEAR(bce_loss(m, mh), sum / kMaskCells, 1e-12);
}

TEST(SegLoss, Examples) {
  const LossConfig cfg;
  const MaskPatch m = binary_patch(200);
  EXPECT_NEAR(seg_loss(m, m, cfg), 0.0, 1e-5);
  Rng rng(8);
  const MaskPatch a = random_patch(rng, true), b = random_patch(rng, false);
  LossConfig no_dice;
  no_dice.lambda_dice = 0.0;
  EXPECT_EQ(seg_loss(a, b, no_dice), 2.0 * bce_loss(a, b));
  EXPECT_NEAR(seg_loss(a, b, cfg), 8.0 * dice_loss(a, b) + 2.0 * bce_loss(a, b), 1e-12);
}

TEST(SegLoss, MonotoneInWeights) {
  Rng rng(4);
  const MaskPatch a = random_patch(rng, true), b = random_patch(rng, false);
  LossConfig cfg;
  double prev = seg_loss(a, b, cfg);
  for (int k = 0; k < 20; ++k) {
    (k % 2 ? cfg.lambda_dice : cfg.lambda_bce) += 0.5;
    const double cur = seg_loss(a, b, cfg);
    ASSERT_GE(cur, prev);
    prev = cur;
  }
}

TEST(CircleRoiCrop, ConstantMasks) {
  const BinaryMask ones(40, 50, 1), zeros(40, 50, 0);
  const Circle c{20.5, 17.25, 9.0};
  for (double v : circle_roi_crop(ones, c).cells) ASSERT_EQ(v, 1.0);
  for (double v : circle_roi_crop(zeros, c).cells) ASSERT_EQ(v, 0.0);
}

TEST(CircleRoiCrop, InscribedDisk) {
  const Circle c{50.0, 50.0, 40.0};
  const BinaryMask disk = rasterize_disk(100, 100, c);
  const MaskPatch p = circle_roi_crop(disk, c);
  double mass = 0.0;
  int above = 0;
  for (double v : p.cells) {
    mass += v;
    above += v >= 0.5;
  }
  EXPECT_NEAR(mass / kMaskCells, std::numbers::pi / 4, 0.02);
  EXPECT_NEAR(static_cast<double>(above) / kMaskCells, std::numbers::pi / 4, 0.02);
}

TEST(CircleRoiCrop, TranslationByWholePixels) {
  const Circle c{14.3, 11.7, 6.2};
  const BinaryMask a = rasterize_disk(30, 30, c);
  BinaryMask b(30, 40, 0);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) b.at(i, j + 7) = a.at(i, j);
  }
  const MaskPatch pa = circle_roi_crop(a, c);
  const MaskPatch pb = circle_roi_crop(b, {c.x + 7, c.y, c.r});
  for (int k = 0; k < kMaskCells; ++k) ASSERT_NEAR(pa.cells[k], pb.cells[k], 1e-9);
}

TEST(CircleRoiCrop, Errors) {
  const BinaryMask m(20, 20, 1);
  EXPECT_THROW(circle_roi_crop(m, {-10, 5, 3}), EmptyRegion);
  EXPECT_THROW(circle_roi_crop(m, {5, 25, 4}), EmptyRegion);
  EXPECT_THROW(circle_roi_crop(m, {5, 5, 0}), InvalidCircle);
  EXPECT_NO_THROW(circle_roi_crop(m, {-2, 5, 3}));  // partially inside
}

}  // namespace
}  // namespace circdet
