// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include <gtest/gtest.h>

#include <cmath>

#include "circdet/errors.hpp"
#include "circdet/geometry.hpp"
#include "circdet/oracle.hpp"
#include "circdet/synthgen.hpp"

namespace circdet {
namespace {

TEST(RasterizeDisk, PixelCenterRule) {
  const BinaryMask m = rasterize_disk(4, 4, {2.0, 2.0, 1.0});
  // Centers (1.5|2.5, 1.5|2.5) are at distance sqrt(0.5) < 1; nothing else.
  int count = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const bool inside = (i == 1 || i == 2) && (j == 1 || j == 2);
      EXPECT_EQ(m.at(i, j), inside ? 1 : 0) << i << "," << j;
      count += m.at(i, j);
    }
  }
  EXPECT_EQ(count, 4);
  // A center exactly on the boundary is outside.
  EXPECT_EQ(rasterize_disk(1, 3, {0.5, 0.5, 2.0}).at(0, 2), 0);
}

TEST(GenerateScene, EmptyScene) {
  GenConfig cfg;
  cfg.n_min = cfg.n_max = 0;
  const Scene s = generate_scene(cfg);
  EXPECT_TRUE(s.truth.circles.empty());
  EXPECT_EQ(s.features.height, 64);
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) ASSERT_EQ(s.features.at(i, j, 0), 0.0f);
  }
}

TEST(GenerateScene, Deterministic) {
  GenConfig cfg;
  cfg.seed = 77;
  const Scene a = generate_scene(cfg), b = generate_scene(cfg);
  EXPECT_EQ(a.truth.circles, b.truth.circles);
  EXPECT_EQ(a.truth.masks, b.truth.masks);
  EXPECT_EQ(a.features.data, b.features.data);
  cfg.seed = 78;
  EXPECT_NE(generate_scene(cfg).truth.circles, a.truth.circles);
}

TEST(GenerateScene, Seed42Contract) {
  GenConfig cfg;
  cfg.seed = 42;
  const Scene s = generate_scene(cfg);
  const auto& c = s.truth.circles;
  ASSERT_EQ(c.size(), 5u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_GE(c[i].r, 4.0);
    EXPECT_LE(c[i].r, 8.0);
    EXPECT_GE(c[i].x - c[i].r, 1.0);
    EXPECT_GE(c[i].y - c[i].r, 1.0);
    EXPECT_LE(c[i].x + c[i].r, 63.0);
    EXPECT_LE(c[i].y + c[i].r, 63.0);
    for (std::size_t j = i + 1; j < c.size(); ++j) EXPECT_LE(ciou(c[i], c[j]), 0.1);
  }
  // Monte Carlo spot check of the most overlapping pair.
  double worst = -1.0;
  std::size_t wi = 0, wj = 1;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      if (ciou(c[i], c[j]) > worst) {
        worst = ciou(c[i], c[j]);
        wi = i;
        wj = j;
      }
    }
  }
  const auto mc = oracle::mc_intersection_area(c[wi], c[wj], 1'000'000, 42);
  EXPECT_LE(std::abs(mc.estimate - intersection_area(c[wi], c[wj])), 4 * mc.std_error + 1e-12);
}

TEST(GenerateScene, MasksAndFeatureChannelZero) {
  GenConfig cfg;
  cfg.seed = 5;
  cfg.n_min = 3;
  cfg.n_max = 9;
  cfg.max_overlap_ciou = 0.3;
  const Scene s = generate_scene(cfg);
  ASSERT_EQ(s.truth.masks.size(), s.truth.circles.size());
  std::vector<int> cover(64 * 64, 0);
  for (std::size_t k = 0; k < s.truth.circles.size(); ++k) {
    const BinaryMask expect = rasterize_disk(64, 64, s.truth.circles[k]);
    ASSERT_EQ(s.truth.masks[k], expect);
    int count = 0;
    for (std::size_t p = 0; p < expect.data.size(); ++p) {
      count += expect.data[p];
      cover[p] += expect.data[p];
    }
    EXPECT_GT(count, 0);
  }
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) ASSERT_EQ(s.features.at(i, j, 0), static_cast<float>(cover[i * 64 + j]));
  }
  // Noise channels are non-trivial and finite.
  double energy = 0.0;
  for (int c = 1; c < s.features.depth; ++c) energy += std::abs(s.features.at(10, 10, c));
  EXPECT_GT(energy, 0.0);
}

TEST(GenerateScene, CirclesAreMicroPixelQuantized) {
  GenConfig cfg;
  cfg.seed = 9;
  for (const auto& c : generate_scene(cfg).truth.circles) {
    for (double v : {c.x, c.y, c.r}) EXPECT_EQ(v, std::round(v * 1e6) / 1e6);
  }
}

TEST(GenerateScene, ValidityProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.n_min = 2;
    cfg.n_max = 8;
    const Scene s = generate_scene(cfg);
    ASSERT_GE(s.truth.circles.size(), 2u);
    ASSERT_LE(s.truth.circles.size(), 8u);
    for (std::size_t k = 0; k < s.truth.circles.size(); ++k) {
      ASSERT_NO_THROW(validate_circle(s.truth.circles[k]));
      int count = 0;
      for (auto v : s.truth.masks[k].data) count += v;
      int direct = 0;
      const Circle& c = s.truth.circles[k];
      for (int i = 0; i < 64; ++i) {
        for (int j = 0; j < 64; ++j) direct += std::hypot(j + 0.5 - c.x, i + 0.5 - c.y) < c.r;
      }
      // hypot and the squared comparison can only disagree on the boundary.
      ASSERT_NEAR(count, direct, 1);
    }
  }
}

TEST(GenerateScene, Infeasible) {
  GenConfig cfg;
  cfg.n_min = cfg.n_max = 50;
  cfg.r_min = cfg.r_max = 20;
  cfg.max_overlap_ciou = 0.0;
  EXPECT_THROW(generate_scene(cfg), InfeasibleConfig);
  GenConfig bad;
  bad.r_min = 0;
  EXPECT_THROW(validate_gen_config(bad), InfeasibleConfig);
  bad = {};
  bad.max_overlap_ciou = 1.0;
  EXPECT_THROW(validate_gen_config(bad), InfeasibleConfig);
  bad = {};
  bad.n_min = 3;
  bad.n_max = 2;
  EXPECT_THROW(validate_gen_config(bad), InfeasibleConfig);
}

TEST(GenerateDataset, SeedsAndIds) {
  GenConfig cfg;
  cfg.num_images = 3;
  cfg.seed = 10;
  const auto ds = generate_dataset(cfg);
  ASSERT_EQ(ds.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(ds[k].truth.image_id, k);
    GenConfig one = cfg;
    one.seed = 10 + k;
    EXPECT_EQ(ds[k].truth.circles, generate_scene(one).truth.circles);
  }
  cfg.num_images = 0;
  EXPECT_TRUE(generate_dataset(cfg).empty());
}

}  // namespace
}  // namespace circdet
