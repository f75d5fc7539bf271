// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "circdet/circle.hpp"

namespace circdet {

struct Detection {
  Circle circle;  // pixel units
  double score = 0.0;
};

/// Detections keyed by image id.
using DetectionSet = std::map<std::int64_t, std::vector<Detection>>;

/// Ground-truth circles (pixel units) keyed by image id.
using TruthSet = std::map<std::int64_t, std::vector<Circle>>;

enum class MatchFlag : std::uint8_t { kTruePositive, kFalsePositive, kIgnored };

/// Order in which detections are matched: descending score, then larger
/// radius, then input order.
std::vector<std::size_t> detection_order(const std::vector<Detection>& dets);

/// Greedy matching of one image's detections at a cIoU threshold. Each
/// detection, in detection_order(), takes the unmatched ground truth of
/// highest cIoU (lowest index on ties) provided cIoU >= thresh. Flags are
/// returned in input order.
std::vector<MatchFlag> greedy_match(const std::vector<Detection>& dets,
                                    const std::vector<Circle>& gts, double thresh);

/// Matching with an area bucket: ground truths outside the bucket may absorb
/// detections without counting, and unmatched detections outside the bucket
/// are ignored.
std::vector<MatchFlag> greedy_match_in_range(const std::vector<Detection>& dets,
                                             const std::vector<Circle>& gts, double thresh,
                                             double area_lo, double area_hi);

struct ScoredFlag {
  double score = 0.0;
  bool true_positive = false;
};

struct ApValue {
  double ap = 0.0;
  bool no_ground_truth = false;  // AP reported as 0 because n_gt == 0
};

/// 101-point interpolated AP. Entries must already be in global rank order
/// (descending score); ignored detections must be removed.
ApValue average_precision(const std::vector<ScoredFlag>& ranked, std::int64_t n_gt);

struct ApReport {
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ap_s = 0.0;
  double ap_m = 0.0;
  std::vector<double> thresholds;     // 0.50, 0.55, ..., 0.95
  std::vector<double> ap_per_thresh;  // all sizes
  std::vector<double> ap_s_per_thresh;
  std::vector<double> ap_m_per_thresh;
  std::vector<std::string> warnings;
};

inline constexpr double kSmallAreaMax = 32.0 * 32.0;
inline constexpr double kMediumAreaMax = 96.0 * 96.0;

/// COCO-style summary under cIoU. Size buckets use the circle area pi r^2.
/// Throws MissingImage when a detection refers to an image without truth.
ApReport ap_summary(const DetectionSet& dets, const TruthSet& truths);

}  // namespace circdet
