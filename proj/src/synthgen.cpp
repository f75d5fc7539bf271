// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "circdet/errors.hpp"
#include "circdet/geometry.hpp"
#include "circdet/random.hpp"

namespace circdet {
namespace {

// Micro-pixel grid. k / 1e6 is the double nearest the decimal, so a value
// below 1000 px prints exactly in 9 significant digits and parses back bit
// for bit.
double quantize(double v) { return std::round(v * 1e6) / 1e6; }

FeatureGrid render_features(const GenConfig& cfg, const std::vector<BinaryMask>& masks, Rng& rng) {
  const int h = cfg.height, w = cfg.width, depth = cfg.depth;
  FeatureGrid grid(h, w, depth);
  for (const auto& m : masks) {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) grid.at(i, j, 0) += static_cast<float>(m.at(i, j));
    }
  }
  std::vector<float> noise(static_cast<std::size_t>(h) * w);
  for (int ch = 1; ch < depth; ++ch) {
    for (auto& v : noise) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        float acc = 0.0f;
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            const int ii = std::clamp(i + di, 0, h - 1);
            const int jj = std::clamp(j + dj, 0, w - 1);
            acc += noise[ii * w + jj];
          }
        }
        grid.at(i, j, ch) = acc / 9.0f;
      }
    }
  }
  return grid;
}

}  // namespace

void validate_gen_config(const GenConfig& cfg) {
  if (cfg.height < 1 || cfg.width < 1) throw InfeasibleConfig("gen: image size must be >= 1");
  if (cfg.depth < 2 || cfg.depth % 2 != 0) throw InfeasibleConfig("gen: depth must be even and >= 2");
  if (cfg.n_min < 0 || cfg.n_max < cfg.n_min) throw InfeasibleConfig("gen: need 0 <= n_min <= n_max");
  if (!(cfg.r_min > 0.0) || cfg.r_max < cfg.r_min) throw InfeasibleConfig("gen: need 0 < r_min <= r_max");
  if (!(cfg.max_overlap_ciou >= 0.0 && cfg.max_overlap_ciou < 1.0)) {
    throw InfeasibleConfig("gen: max_overlap_ciou must lie in [0, 1)");
  }
  if (cfg.num_images < 0) throw InfeasibleConfig("gen: num_images must be >= 0");
}

BinaryMask rasterize_disk(int height, int width, const Circle& c) {
  BinaryMask m(height, width);
  const double r2 = c.r * c.r;
  for (int i = 0; i < height; ++i) {
    const double dy = i + 0.5 - c.y;
    for (int j = 0; j < width; ++j) {
      const double dx = j + 0.5 - c.x;
      m.at(i, j) = dx * dx + dy * dy < r2 ? 1 : 0;
    }
  }
  return m;
}

Scene generate_scene(const GenConfig& cfg, std::int64_t image_id) {
  validate_gen_config(cfg);
  Rng rng(cfg.seed);
  Scene scene;
  auto& truth = scene.truth;
  truth.image_id = image_id;
  truth.height = cfg.height;
  truth.width = cfg.width;

  const auto target = static_cast<int>(rng.integer(cfg.n_min, cfg.n_max));
  int attempts = 0;
  while (static_cast<int>(truth.circles.size()) < target) {
    if (attempts++ >= kMaxPlacementAttempts) {
      throw InfeasibleConfig("gen: placed " + std::to_string(truth.circles.size()) + " of " +
                             std::to_string(target) + " circles in " +
                             std::to_string(kMaxPlacementAttempts) + " attempts");
    }
    const double r = quantize(rng.uniform(cfg.r_min, cfg.r_max));
    const double margin = r + 1.0;
    const double x_span = cfg.width - 2.0 * margin;
    const double y_span = cfg.height - 2.0 * margin;
    const double ux = rng.uniform();
    const double uy = rng.uniform();
    if (x_span < 0.0 || y_span < 0.0) continue;
    Circle c{quantize(margin + ux * x_span), quantize(margin + uy * y_span), r};
    if (c.x - c.r < 1.0 || c.y - c.r < 1.0 || c.x + c.r > cfg.width - 1.0 ||
        c.y + c.r > cfg.height - 1.0) {
      continue;  // rounding pushed it over the margin
    }
    const bool ok = std::all_of(truth.circles.begin(), truth.circles.end(), [&](const Circle& o) {
      return ciou(c, o) <= cfg.max_overlap_ciou;
    });
    if (ok) truth.circles.push_back(c);
  }
  for (const auto& c : truth.circles) truth.masks.push_back(rasterize_disk(cfg.height, cfg.width, c));
  scene.features = render_features(cfg, truth.masks, rng);
  return scene;
}

std::vector<Scene> generate_dataset(const GenConfig& cfg) {
  validate_gen_config(cfg);
  std::vector<Scene> out;
  for (int k = 0; k < cfg.num_images; ++k) {
    GenConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(k);
    out.push_back(generate_scene(c, k));
  }
  return out;
}

}  // namespace circdet
