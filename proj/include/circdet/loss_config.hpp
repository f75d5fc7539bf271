// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

namespace circdet {

/// Loss weights and focal-loss parameters. Defaults are the published
/// training values.
struct LossConfig {
  double alpha = 0.25;
  double gamma = 0.1;
  double lambda_focal_match = 2.0;  // focal weight inside the matching cost
  double lambda_focal_loss = 1.0;   // focal weight in the training loss
  double lambda_gciou = 2.0;
  double lambda_c = 5.0;
  double lambda_dice = 8.0;
  double lambda_bce = 2.0;
};

/// Throws Error if any weight is negative, alpha is outside [0,1] or gamma < 0.
void validate_loss_config(const LossConfig& cfg);

}  // namespace circdet
