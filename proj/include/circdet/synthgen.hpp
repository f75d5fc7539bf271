// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <cstdint>
#include <vector>

#include "circdet/circle.hpp"
#include "circdet/feature_grid.hpp"
#include "circdet/segloss.hpp"

namespace circdet {

struct GenConfig {
  int height = 64;
  int width = 64;
  int n_min = 5;
  int n_max = 5;
  double r_min = 4.0;  // pixels
  double r_max = 8.0;
  double max_overlap_ciou = 0.1;
  std::uint64_t seed = 0;
  int depth = 32;       // feature channels
  int num_images = 0;   // dataset size for generate_dataset / `gen`
};

/// Throws InfeasibleConfig on out-of-range fields.
void validate_gen_config(const GenConfig& cfg);

struct SceneTruth {
  std::int64_t image_id = 0;
  int height = 0;
  int width = 0;
  std::vector<Circle> circles;     // pixel units
  std::vector<BinaryMask> masks;   // one rasterized disk per circle
};

struct Scene {
  SceneTruth truth;
  FeatureGrid features;
};

/// Pixel (i, j) is inside iff its center (j + 0.5, i + 0.5) lies strictly
/// inside the circle.
BinaryMask rasterize_disk(int height, int width, const Circle& c);

inline constexpr int kMaxPlacementAttempts = 10000;

/// Seeded rejection sampling: every circle keeps a 1 px margin to the image
/// border and pairwise cIoU <= max_overlap_ciou. Circle parameters are
/// quantized to 1e-6 px so text files round-trip exactly.
///
/// Features: channel 0 counts covering disks per pixel, the remaining
/// channels hold 3x3 box-blurred seeded noise.
///
/// Throws InfeasibleConfig when 10^4 placement attempts are exhausted.
Scene generate_scene(const GenConfig& cfg, std::int64_t image_id = 0);

/// Image k is generate_scene with seed cfg.seed + k and id k.
std::vector<Scene> generate_dataset(const GenConfig& cfg);

}  // namespace circdet
