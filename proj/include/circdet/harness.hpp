// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circdet/decoder.hpp"
#include "circdet/evalap.hpp"
#include "circdet/loss_config.hpp"
#include "circdet/random.hpp"

namespace circdet {

// ---------------------------------------------------------------------------
// Direct optimization of prediction circles against a fixed set of targets.

enum class RegressionLoss {
  kGciou,  // lambda_gciou (1 - gciou) + lambda_c l1
  kCiou,   // lambda_gciou (1 - ciou), no l1 term
  kL1,     // lambda_c l1
};

RegressionLoss parse_regression_loss(const std::string& name);
std::string to_string(RegressionLoss loss);

struct OptimizeConfig {
  RegressionLoss loss = RegressionLoss::kGciou;
  int steps = 2000;
  double lr = 0.01;
  int grid_side = 5;          // initial predictions on a grid_side^2 lattice
  double init_radius = 0.02;  // normalized
  // Coordinates the descent runs in. Targets and predictions are expressed in
  // this frame (pixels for a scene); the initial lattice is laid out in
  // normalized units and mapped through it.
  ImageFrame frame;
  LossConfig weights;
};

struct OptimizeStep {
  int step = 0;
  double loss = 0.0;
  double mean_ciou = 0.0;
};

struct OptimizeReport {
  RegressionLoss loss = RegressionLoss::kGciou;
  std::vector<OptimizeStep> trajectory;  // steps + 1 entries, before each update
  std::vector<Circle> initial_predictions;
  std::vector<Circle> final_predictions;
  double final_mean_ciou = 0.0;
  double final_loss = 0.0;
  bool tail_monotone = false;  // loss non-increasing over the final 90% of steps
};

/// Predictions start on a lattice, minus every cell touching a target.
std::vector<Circle> disjoint_grid_predictions(const std::vector<Circle>& targets, int side,
                                              double radius);

/// Plain gradient descent on the circle parameters of the predictions,
/// re-running Hungarian matching every step. Targets are in cfg.frame units.
/// Throws DivergedLoss on a non-finite loss.
OptimizeReport optimize_circles(const std::vector<Circle>& targets,
                                std::vector<Circle> predictions, const OptimizeConfig& cfg);

OptimizeReport optimize_circles(const std::vector<Circle>& targets, const OptimizeConfig& cfg);

/// Loss of one (target, prediction) pair under `loss`.
double regression_pair_loss(RegressionLoss loss, const Circle& target, const Circle& pred,
                            const LossConfig& w);

// ---------------------------------------------------------------------------
// Decoder forward demo.

struct ForwardConfig {
  int layers = 6;
  AttentionVariant variant = AttentionVariant::kDeformable;
  int num_queries = 16;
  double init_radius = 0.1;
  std::uint64_t seed = 0;
};

struct ForwardReport {
  std::vector<std::vector<Circle>> anchors;  // layers + 1 entries, normalized
  std::vector<Detection> detections;         // pixel units
};

ForwardReport run_forward(const FeatureGrid& grid, const DecoderWeights& weights,
                          const ForwardConfig& cfg);

// ---------------------------------------------------------------------------
// Oracle check suites.

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // observed worst-case statistic
  double tolerance = 0.0;  // pass iff value <= tolerance
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 0;
  int trials = 100;
  bool sabotage = false;  // flips one sign per suite; the suite must then fail
};

std::vector<CheckResult> run_geom_checks(const CheckOptions& opt);
std::vector<CheckResult> run_match_checks(const CheckOptions& opt);
std::vector<CheckResult> run_attn_checks(const CheckOptions& opt);

/// suite: geom | match | attn | all. Throws Error on an unknown suite.
std::vector<CheckResult> run_check_suite(const std::string& suite, const CheckOptions& opt);

/// Random circle with center in [0,1]^2 and radius in [r_lo, r_hi).
Circle random_circle(Rng& rng, double r_lo = 0.02, double r_hi = 0.3);

/// Relative error ||a - b|| / max(||a||, ||b||, floor).
double relative_error(const std::vector<double>& a, const std::vector<double>& b,
                      double floor = 1e-8);

}  // namespace circdet
