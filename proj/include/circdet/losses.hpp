// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <optional>
#include <vector>

#include "circdet/assignment.hpp"
#include "circdet/circle.hpp"
#include "circdet/loss_config.hpp"
#include "circdet/segloss.hpp"

namespace circdet {

/// Probability clamp applied before any log in the focal loss.
inline constexpr double kProbClamp = 1e-6;

struct Prediction {
  Circle circle;
  double class_prob = 0.5;  // foreground probability after sigmoid
  std::optional<MaskPatch> mask;
};

enum class Label { kForeground, kNone };

struct GroundTruth {
  Circle circle;
  Label label = Label::kForeground;
  std::optional<MaskPatch> mask;  // RoI-aligned target for the matched prediction
};

/// Binary focal loss. positive: -alpha (1-p)^gamma log p;
/// negative: -(1-alpha) p^gamma log(1-p). p is clamped to [1e-6, 1-1e-6].
double focal_loss(double p, bool positive, const LossConfig& cfg);

/// |dx| + |dy| + |dr|.
double l1_circle(const Circle& c, const Circle& chat);

/// lambda_gciou * (1 - gciou) + lambda_c * l1.
double circle_loss(const Circle& c, const Circle& chat, const LossConfig& cfg);

/// |gts| x |preds| matching cost. Every gt must be foreground; drop the
/// no-object rows first (see foreground_indices).
CostMatrix match_cost_matrix(const std::vector<Prediction>& preds,
                             const std::vector<GroundTruth>& gts,
                             const LossConfig& cfg);

/// Indices of the foreground ground truths, in order.
std::vector<std::size_t> foreground_indices(const std::vector<GroundTruth>& gts);

/// Hungarian matching of the foreground ground truths; pair indices refer to
/// the original `gts` list.
Assignment match(const std::vector<Prediction>& preds,
                 const std::vector<GroundTruth>& gts, const LossConfig& cfg);

struct LossBreakdown {
  double total = 0.0;
  double focal = 0.0;   // already weighted by lambda_focal_loss
  double circle = 0.0;
  double seg = 0.0;
};

/// Training loss for a fixed assignment: focal over every prediction
/// (matched = positive, unmatched = negative), circle loss over matched
/// pairs, segmentation loss over matched pairs that carry both masks.
///
/// Throws InvalidAssignment unless the pairs are in range, injective, and
/// cover exactly the foreground ground truths.
LossBreakdown total_loss(const std::vector<Prediction>& preds,
                         const std::vector<GroundTruth>& gts,
                         const Assignment& assignment, const LossConfig& cfg);

}  // namespace circdet
