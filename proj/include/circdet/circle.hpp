// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "circdet/errors.hpp"

namespace circdet {

/// A circle given by its center and radius. Detector-side code keeps these
/// normalized to the image (nominally [0,1]); evaluation code works in pixels.
struct Circle {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;

  friend bool operator==(const Circle&, const Circle&) = default;
};

inline bool is_finite(const Circle& c) noexcept {
  return std::isfinite(c.x) && std::isfinite(c.y) && std::isfinite(c.r);
}

/// Throws InvalidCircle unless all fields are finite and r > 0.
inline void validate_circle(const Circle& c, const char* what = "circle") {
  if (!is_finite(c)) {
    throw InvalidCircle(std::string(what) + ": non-finite field");
  }
  if (!(c.r > 0.0)) {
    throw InvalidCircle(std::string(what) + ": radius must be > 0, got " +
                        std::to_string(c.r));
  }
}

inline double center_distance(const Circle& a, const Circle& b) noexcept {
  return std::hypot(b.x - a.x, b.y - a.y);
}

/// Pixel <-> normalized conversion. Centers scale by the image width and
/// height, radii by min(H, W) so circles stay round on non-square images.
struct ImageFrame {
  double height = 1.0;
  double width = 1.0;

  double radius_scale() const noexcept { return std::min(height, width); }

  Circle normalize(const Circle& px) const noexcept {
    return {px.x / width, px.y / height, px.r / radius_scale()};
  }
  Circle denormalize(const Circle& n) const noexcept {
    return {n.x * width, n.y * height, n.r * radius_scale()};
  }
};

}  // namespace circdet
