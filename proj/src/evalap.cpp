// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/evalap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numbers>
#include <numeric>

#include "circdet/errors.hpp"
#include "circdet/geometry.hpp"

namespace circdet {
namespace {

constexpr int kThresholdCount = 10;
constexpr int kRecallPoints = 101;

double area_of(const Circle& c) { return std::numbers::pi * c.r * c.r; }

bool in_range(const Circle& c, double lo, double hi) {
  const double a = area_of(c);
  return a >= lo && a < hi;
}

double threshold_at(int k) { return (50.0 + 5.0 * k) / 100.0; }

struct Bucket {
  const char* name;
  double lo, hi;
};

constexpr Bucket kAll{"all", 0.0, std::numeric_limits<double>::infinity()};
constexpr Bucket kSmall{"small", 0.0, kSmallAreaMax};
constexpr Bucket kMedium{"medium", kSmallAreaMax, kMediumAreaMax};

}  // namespace

std::vector<std::size_t> detection_order(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return dets[a].circle.r > dets[b].circle.r;
  });
  return order;
}

std::vector<MatchFlag> greedy_match_in_range(const std::vector<Detection>& dets,
                                             const std::vector<Circle>& gts, double thresh,
                                             double area_lo, double area_hi) {
  // Ground truths inside the bucket are visited first.
  std::vector<std::size_t> gt_order(gts.size());
  std::iota(gt_order.begin(), gt_order.end(), 0);
  std::vector<char> gt_ignored(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gt_ignored[g] = !in_range(gts[g], area_lo, area_hi);
  }
  std::stable_partition(gt_order.begin(), gt_order.end(),
                        [&](std::size_t g) { return !gt_ignored[g]; });

  std::vector<char> gt_taken(gts.size(), 0);
  std::vector<MatchFlag> flags(dets.size(), MatchFlag::kFalsePositive);
  for (std::size_t d : detection_order(dets)) {
    std::ptrdiff_t best = -1;
    double best_iou = thresh;
    for (std::size_t g : gt_order) {
      if (gt_taken[g]) continue;
      // Once a counted gt is matched, never fall back to an ignored one.
      if (best >= 0 && !gt_ignored[best] && gt_ignored[g]) break;
      const double iou = ciou(dets[d].circle, gts[g]);
      if (iou < thresh) continue;
      if (best < 0 || iou > best_iou) {
        best = static_cast<std::ptrdiff_t>(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      gt_taken[best] = 1;
      flags[d] = gt_ignored[best] ? MatchFlag::kIgnored : MatchFlag::kTruePositive;
    } else if (!in_range(dets[d].circle, area_lo, area_hi)) {
      flags[d] = MatchFlag::kIgnored;
    }
  }
  return flags;
}

std::vector<MatchFlag> greedy_match(const std::vector<Detection>& dets,
                                    const std::vector<Circle>& gts, double thresh) {
  return greedy_match_in_range(dets, gts, thresh, kAll.lo, kAll.hi);
}

ApValue average_precision(const std::vector<ScoredFlag>& ranked, std::int64_t n_gt) {
  if (n_gt <= 0) return {0.0, true};
  const std::size_t n = ranked.size();
  std::vector<double> recall(n), precision(n);
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (ranked[i].true_positive ? tp : fp) += 1.0;
    recall[i] = tp / static_cast<double>(n_gt);
    precision[i] = tp / (tp + fp);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  for (int k = 0; k < kRecallPoints; ++k) {
    const double t = k / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), t);
    if (it != recall.end()) sum += precision[it - recall.begin()];
  }
  return {sum / kRecallPoints, false};
}

namespace {

struct BucketResult {
  std::vector<double> per_thresh;
  bool no_ground_truth = false;
};

BucketResult evaluate_bucket(const DetectionSet& dets, const TruthSet& truths, Bucket b) {
  BucketResult out;
  std::int64_t n_gt = 0;
  for (const auto& [id, gts] : truths) {
    for (const auto& g : gts) n_gt += in_range(g, b.lo, b.hi);
  }
  static const std::vector<Detection> kNone;
  for (int k = 0; k < kThresholdCount; ++k) {
    std::vector<ScoredFlag> ranked;
    for (const auto& [id, gts] : truths) {
      const auto it = dets.find(id);
      const auto& image_dets = it == dets.end() ? kNone : it->second;
      const auto flags = greedy_match_in_range(image_dets, gts, threshold_at(k), b.lo, b.hi);
      for (std::size_t d : detection_order(image_dets)) {
        if (flags[d] == MatchFlag::kIgnored) continue;
        ranked.push_back({image_dets[d].score, flags[d] == MatchFlag::kTruePositive});
      }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const ScoredFlag& a, const ScoredFlag& c) { return a.score > c.score; });
    const ApValue v = average_precision(ranked, n_gt);
    out.per_thresh.push_back(v.ap);
    out.no_ground_truth = v.no_ground_truth;
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

ApReport ap_summary(const DetectionSet& dets, const TruthSet& truths) {
  for (const auto& [id, list] : dets) {
    if (!truths.contains(id)) {
      throw MissingImage("detections reference image " + std::to_string(id) +
                         " which has no ground-truth entry");
    }
    for (const auto& d : list) {
      validate_circle(d.circle, "detection");
      if (!std::isfinite(d.score)) throw Error("detection score is not finite");
    }
  }

  ApReport r;
  for (int k = 0; k < kThresholdCount; ++k) r.thresholds.push_back(threshold_at(k));
  const auto all = evaluate_bucket(dets, truths, kAll);
  const auto small = evaluate_bucket(dets, truths, kSmall);
  const auto medium = evaluate_bucket(dets, truths, kMedium);
  r.ap_per_thresh = all.per_thresh;
  r.ap_s_per_thresh = small.per_thresh;
  r.ap_m_per_thresh = medium.per_thresh;
  r.ap = mean(all.per_thresh);
  r.ap50 = all.per_thresh[0];
  r.ap75 = all.per_thresh[5];
  r.ap_s = mean(small.per_thresh);
  r.ap_m = mean(medium.per_thresh);
  for (const auto* bucket : {&all, &small, &medium}) {
    if (bucket->no_ground_truth) {
      const char* name = bucket == &all ? kAll.name : bucket == &small ? kSmall.name : kMedium.name;
      r.warnings.push_back(std::string("no ground truth in bucket '") + name + "'; AP reported as 0");
    }
  }
  return r;
}

}  // namespace circdet
