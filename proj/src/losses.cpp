// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "circdet/errors.hpp"
#include "circdet/geometry.hpp"
#include "circdet/hungarian.hpp"

namespace circdet {

double focal_loss(double p, bool positive, const LossConfig& cfg) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  if (positive) return -cfg.alpha * std::pow(1.0 - p, cfg.gamma) * std::log(p);
  return -(1.0 - cfg.alpha) * std::pow(p, cfg.gamma) * std::log(1.0 - p);
}

double l1_circle(const Circle& c, const Circle& chat) {
  validate_circle(c, "target");
  validate_circle(chat, "prediction");
  return std::abs(c.x - chat.x) + std::abs(c.y - chat.y) + std::abs(c.r - chat.r);
}

double circle_loss(const Circle& c, const Circle& chat, const LossConfig& cfg) {
  return cfg.lambda_gciou * (1.0 - gciou(c, chat)) + cfg.lambda_c * l1_circle(c, chat);
}

std::vector<std::size_t> foreground_indices(const std::vector<GroundTruth>& gts) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gts[i].label == Label::kForeground) idx.push_back(i);
  }
  return idx;
}

CostMatrix match_cost_matrix(const std::vector<Prediction>& preds,
                             const std::vector<GroundTruth>& gts,
                             const LossConfig& cfg) {
  if (preds.empty()) throw EmptyPredictions("match_cost_matrix: no predictions");
  CostMatrix cost(gts.size(), preds.size());
  for (std::size_t j = 0; j < preds.size(); ++j) {
    const double cls = cfg.lambda_focal_match * focal_loss(preds[j].class_prob, true, cfg);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      if (gts[i].label != Label::kForeground) {
        throw Error("match_cost_matrix: no-object ground truth " + std::to_string(i) +
                    " must be excluded before matching");
      }
      cost(i, j) = cls + circle_loss(gts[i].circle, preds[j].circle, cfg);
      if (!std::isfinite(cost(i, j))) throw NonFiniteCost("match_cost_matrix: non-finite entry");
    }
  }
  return cost;
}

Assignment match(const std::vector<Prediction>& preds,
                 const std::vector<GroundTruth>& gts, const LossConfig& cfg) {
  const auto fg = foreground_indices(gts);
  std::vector<GroundTruth> rows;
  rows.reserve(fg.size());
  for (auto i : fg) rows.push_back(gts[i]);
  const CostMatrix cost = match_cost_matrix(preds, rows, cfg);
  Assignment a;
  if (cost.rows <= cost.cols) {
    a = hungarian(cost);
  } else {
    // More ground truths than predictions: every prediction gets a gt.
    CostMatrix t(cost.cols, cost.rows);
    for (std::size_t i = 0; i < cost.rows; ++i) {
      for (std::size_t j = 0; j < cost.cols; ++j) t(j, i) = cost(i, j);
    }
    for (const auto& p : hungarian(t).pairs) a.pairs.push_back({p.pred, p.gt});
    std::sort(a.pairs.begin(), a.pairs.end(),
              [](const MatchPair& l, const MatchPair& r) { return l.gt < r.gt; });
  }
  for (auto& p : a.pairs) p.gt = fg[p.gt];
  return a;
}

namespace {

void validate_assignment(const std::vector<Prediction>& preds,
                         const std::vector<GroundTruth>& gts,
                         const Assignment& assignment) {
  std::vector<char> gt_used(gts.size(), 0), pred_used(preds.size(), 0);
  for (const auto& p : assignment.pairs) {
    if (p.gt >= gts.size() || p.pred >= preds.size()) {
      throw InvalidAssignment("assignment index out of range");
    }
    if (gt_used[p.gt] || pred_used[p.pred]) {
      throw InvalidAssignment("assignment is not one-to-one");
    }
    if (gts[p.gt].label != Label::kForeground) {
      throw InvalidAssignment("assignment matches a no-object ground truth");
    }
    gt_used[p.gt] = pred_used[p.pred] = 1;
  }
  const auto fg = foreground_indices(gts);
  const std::size_t expected = std::min(fg.size(), preds.size());
  if (assignment.pairs.size() != expected) {
    throw InvalidAssignment("assignment covers " + std::to_string(assignment.pairs.size()) +
                            " ground truths, expected " + std::to_string(expected));
  }
}

}  // namespace

LossBreakdown total_loss(const std::vector<Prediction>& preds,
                         const std::vector<GroundTruth>& gts,
                         const Assignment& assignment, const LossConfig& cfg) {
  validate_assignment(preds, gts, assignment);
  std::vector<char> matched(preds.size(), 0);
  LossBreakdown out;
  for (const auto& p : assignment.pairs) {
    matched[p.pred] = 1;
    out.circle += circle_loss(gts[p.gt].circle, preds[p.pred].circle, cfg);
    if (gts[p.gt].mask && preds[p.pred].mask) {
      out.seg += seg_loss(*gts[p.gt].mask, *preds[p.pred].mask, cfg);
    }
  }
  for (std::size_t j = 0; j < preds.size(); ++j) {
    out.focal += focal_loss(preds[j].class_prob, matched[j] != 0, cfg);
  }
  out.focal *= cfg.lambda_focal_loss;
  out.total = out.focal + out.circle + out.seg;
  return out;
}

}  // namespace circdet
