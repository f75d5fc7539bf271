// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "circdet/attention.hpp"
#include "circdet/errors.hpp"
#include "circdet/geometry.hpp"
#include "circdet/hungarian.hpp"
#include "circdet/losses.hpp"
#include "circdet/oracle.hpp"

namespace circdet {

// ---------------------------------------------------------------------------
// Optimization demo

RegressionLoss parse_regression_loss(const std::string& name) {
  if (name == "gciou") return RegressionLoss::kGciou;
  if (name == "ciou") return RegressionLoss::kCiou;
  if (name == "l1") return RegressionLoss::kL1;
  throw Error("unknown loss '" + name + "' (expected gciou, ciou or l1)");
}

std::string to_string(RegressionLoss loss) {
  switch (loss) {
    case RegressionLoss::kGciou: return "gciou";
    case RegressionLoss::kCiou: return "ciou";
    case RegressionLoss::kL1: return "l1";
  }
  return "?";
}

double regression_pair_loss(RegressionLoss loss, const Circle& target, const Circle& pred,
                            const LossConfig& w) {
  switch (loss) {
    case RegressionLoss::kGciou: return circle_loss(target, pred, w);
    case RegressionLoss::kCiou: return w.lambda_gciou * (1.0 - ciou(target, pred));
    case RegressionLoss::kL1: return w.lambda_c * l1_circle(target, pred);
  }
  return 0.0;
}

namespace {

constexpr double kMinRadius = 1e-4;

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// d loss / d (pred.x, pred.y, pred.r).
CircleGrad pair_gradient(RegressionLoss loss, const Circle& target, const Circle& pred,
                         const LossConfig& w) {
  if (pred == target) return {0.0, 0.0, 0.0};
  CircleGrad g{0.0, 0.0, 0.0};
  if (loss != RegressionLoss::kL1) {
    CircleGrad overlap;
    try {
      overlap = loss == RegressionLoss::kGciou ? grad_gciou(pred, target) : grad_ciou(pred, target);
    } catch (const NonDifferentiablePoint&) {
      const double p[3] = {pred.x, pred.y, pred.r};
      const auto fd = oracle::finite_diff_grad(
          [&](std::span<const double> v) {
            const Circle c{v[0], v[1], v[2]};
            return loss == RegressionLoss::kGciou ? gciou(c, target) : ciou(c, target);
          },
          p, 1e-7);
      overlap = {fd[0], fd[1], fd[2]};
    }
    for (int i = 0; i < 3; ++i) g[i] -= w.lambda_gciou * overlap[i];
  }
  if (loss != RegressionLoss::kCiou) {
    g[0] += w.lambda_c * sign(pred.x - target.x);
    g[1] += w.lambda_c * sign(pred.y - target.y);
    g[2] += w.lambda_c * sign(pred.r - target.r);
  }
  return g;
}

LossConfig weights_for(RegressionLoss loss, LossConfig w) {
  if (loss == RegressionLoss::kCiou) w.lambda_c = 0.0;
  if (loss == RegressionLoss::kL1) w.lambda_gciou = 0.0;
  return w;
}

}  // namespace

std::vector<Circle> disjoint_grid_predictions(const std::vector<Circle>& targets, int side,
                                              double radius) {
  std::vector<Circle> out;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const Circle c{(j + 0.5) / side, (i + 0.5) / side, radius};
      const bool touches = std::any_of(targets.begin(), targets.end(), [&](const Circle& t) {
        return center_distance(c, t) <= c.r + t.r;
      });
      if (!touches) out.push_back(c);
    }
  }
  return out;
}

OptimizeReport optimize_circles(const std::vector<Circle>& targets, const OptimizeConfig& cfg) {
  std::vector<Circle> normalized;
  for (const auto& t : targets) normalized.push_back(cfg.frame.normalize(t));
  auto preds = disjoint_grid_predictions(normalized, cfg.grid_side, cfg.init_radius);
  for (auto& p : preds) p = cfg.frame.denormalize(p);
  return optimize_circles(targets, std::move(preds), cfg);
}

OptimizeReport optimize_circles(const std::vector<Circle>& targets,
                                std::vector<Circle> preds, const OptimizeConfig& cfg) {
  if (preds.size() < targets.size()) {
    throw Error("optimize: need at least as many predictions as targets");
  }
  for (const auto& t : targets) validate_circle(t, "target");
  const LossConfig w = weights_for(cfg.loss, cfg.weights);

  OptimizeReport report;
  report.loss = cfg.loss;
  report.initial_predictions = preds;

  CostMatrix cost(targets.size(), preds.size());
  for (int step = 0; step <= cfg.steps; ++step) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      for (std::size_t j = 0; j < preds.size(); ++j) {
        cost(i, j) = regression_pair_loss(cfg.loss, targets[i], preds[j], w);
      }
    }
    for (double v : cost.data) {
      if (!std::isfinite(v)) throw DivergedLoss("optimize: non-finite loss at step " + std::to_string(step));
    }
    const Assignment a = hungarian(cost);
    OptimizeStep rec{step, assignment_cost(cost, a), 0.0};
    for (const auto& p : a.pairs) rec.mean_ciou += ciou(targets[p.gt], preds[p.pred]);
    if (!targets.empty()) rec.mean_ciou /= static_cast<double>(targets.size());
    report.trajectory.push_back(rec);
    if (step == cfg.steps) break;

    for (const auto& p : a.pairs) {
      Circle& c = preds[p.pred];
      const CircleGrad g = pair_gradient(cfg.loss, targets[p.gt], c, w);
      c.x -= cfg.lr * g[0];
      c.y -= cfg.lr * g[1];
      c.r = std::max(kMinRadius, c.r - cfg.lr * g[2]);
      if (!is_finite(c)) throw DivergedLoss("optimize: non-finite parameters at step " + std::to_string(step));
    }
  }

  report.final_predictions = preds;
  report.final_loss = report.trajectory.back().loss;
  report.final_mean_ciou = report.trajectory.back().mean_ciou;
  const std::size_t start = report.trajectory.size() / 10;
  report.tail_monotone = true;
  for (std::size_t t = start + 1; t < report.trajectory.size(); ++t) {
    if (report.trajectory[t].loss > report.trajectory[t - 1].loss) report.tail_monotone = false;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Forward demo

ForwardReport run_forward(const FeatureGrid& grid, const DecoderWeights& weights,
                          const ForwardConfig& cfg) {
  if (cfg.layers < 0 || static_cast<std::size_t>(cfg.layers) > weights.layers.size()) {
    throw ShapeError("forward: requested " + std::to_string(cfg.layers) + " layers, weights hold " +
                     std::to_string(weights.layers.size()));
  }
  auto queries = initial_queries(cfg.num_queries, weights.dim, cfg.init_radius, cfg.seed);
  ForwardReport report;
  auto snapshot = [&] {
    std::vector<Circle> a;
    for (const auto& q : queries) a.push_back(q.anchor);
    report.anchors.push_back(std::move(a));
  };
  snapshot();
  for (int l = 0; l < cfg.layers; ++l) {
    queries = decoder_layer_forward(queries, grid, weights, static_cast<std::size_t>(l), cfg.variant).queries;
    snapshot();
  }
  const ImageFrame frame{static_cast<double>(grid.height), static_cast<double>(grid.width)};
  for (const auto& q : queries) {
    report.detections.push_back({frame.denormalize(q.anchor), query_score(q, weights)});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Check suites

Circle random_circle(Rng& rng, double r_lo, double r_hi) {
  return {rng.uniform(), rng.uniform(), rng.uniform(r_lo, r_hi)};
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

namespace {

constexpr std::int64_t kCheckSamples = 200000;

CheckResult make_result(std::string name, double value, double tolerance, std::string detail = {}) {
  return {std::move(name), value <= tolerance, value, tolerance, std::move(detail)};
}

// |closed form - estimate| in units of the estimate's standard error.
double sigma_distance(double exact, const oracle::McEstimate& est) {
  const double diff = std::abs(exact - est.estimate);
  if (est.std_error > 0.0) return diff / est.std_error;
  return diff <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
}

// Pairs that overlap often enough to make the Monte Carlo comparison
// informative: the second center is drawn near the first.
std::pair<Circle, Circle> overlapping_pair(Rng& rng) {
  const Circle a = random_circle(rng, 0.05, 0.3);
  const double reach = a.r + 0.3;
  const Circle b{a.x + rng.uniform(-reach, reach), a.y + rng.uniform(-reach, reach),
                 rng.uniform(0.05, 0.3)};
  return {a, b};
}

}  // namespace

std::vector<CheckResult> run_geom_checks(const CheckOptions& opt) {
  std::vector<CheckResult> out;
  Rng rng(splitmix64(opt.seed ^ 0x6e0ULL));

  double worst_area = 0.0, worst_gciou = 0.0;
  for (int t = 0; t < opt.trials; ++t) {
    const auto [a, b] = overlapping_pair(rng);
    worst_area = std::max(worst_area, sigma_distance(intersection_area(a, b),
                                                     oracle::mc_intersection_area(a, b, kCheckSamples, rng.bits())));
    worst_gciou = std::max(worst_gciou, sigma_distance(gciou(a, b),
                                                       oracle::mc_gciou(a, b, kCheckSamples, rng.bits())));
  }
  out.push_back(make_result("intersection_area vs monte carlo (sigmas)", worst_area, 4.0));
  out.push_back(make_result("gciou vs monte carlo (sigmas)", worst_gciou, 4.0));

  double worst_grad = 0.0;
  int skipped = 0;
  for (int t = 0; t < opt.trials; ++t) {
    const auto [a, b] = overlapping_pair(rng);
    CircleGrad g;
    try {
      g = grad_gciou(a, b);
    } catch (const NonDifferentiablePoint&) {
      ++skipped;
      continue;
    }
    if (opt.sabotage) g[0] = -g[0];
    const double p[3] = {a.x, a.y, a.r};
    const auto fd = oracle::finite_diff_grad(
        [&](std::span<const double> v) { return gciou({v[0], v[1], v[2]}, b); }, p, 1e-6);
    worst_grad = std::max(worst_grad, relative_error({g[0], g[1], g[2]}, fd));
  }
  out.push_back(make_result("grad_gciou vs finite differences (relative)", worst_grad, 1e-5,
                            std::to_string(skipped) + " singular pairs skipped"));

  double worst_sym = 0.0, worst_inv = 0.0;
  int bound_violations = 0;
  for (int t = 0; t < opt.trials; ++t) {
    const auto [a, b] = overlapping_pair(rng);
    worst_sym = std::max({worst_sym, std::abs(ciou(a, b) - ciou(b, a)),
                          std::abs(gciou(a, b) - gciou(b, a)),
                          std::abs(intersection_area(a, b) - intersection_area(b, a))});
    const double c = ciou(a, b), g = gciou(a, b);
    if (c < 0.0 || c > 1.0 || g <= -1.0 || g > 1.0 || g > c) ++bound_violations;
    const double tx = rng.uniform(-5.0, 5.0), ty = rng.uniform(-5.0, 5.0);
    const Circle at{a.x + tx, a.y + ty, a.r}, bt{b.x + tx, b.y + ty, b.r};
    const double s = rng.uniform(0.1, 10.0);
    const Circle as{a.x * s, a.y * s, a.r * s}, bs{b.x * s, b.y * s, b.r * s};
    worst_inv = std::max({worst_inv, std::abs(ciou(at, bt) - c), std::abs(gciou(at, bt) - g),
                          std::abs(ciou(as, bs) - c), std::abs(gciou(as, bs) - g)});
  }
  out.push_back(make_result("argument symmetry (abs diff)", worst_sym, 1e-12));
  out.push_back(make_result("range / ordering violations", bound_violations, 0.0));
  out.push_back(make_result("translation / scale invariance (abs diff)", worst_inv, 1e-9));

  int monotone_violations = 0;
  double prev = std::numeric_limits<double>::infinity();
  for (double d = 2.01; d <= 10.0; d += 0.01) {
    const double g = gciou({0, 0, 1}, {d, 0, 1});
    if (!(g < prev) || ciou({0, 0, 1}, {d, 0, 1}) != 0.0) ++monotone_violations;
    prev = g;
  }
  out.push_back(make_result("gciou strictly decreasing for disjoint circles", monotone_violations, 0.0));
  return out;
}

std::vector<CheckResult> run_match_checks(const CheckOptions& opt) {
  std::vector<CheckResult> out;
  Rng rng(splitmix64(opt.seed ^ 0x3a7ULL));

  int mismatches = 0;
  for (int t = 0; t < opt.trials; ++t) {
    const auto rows = static_cast<std::size_t>(rng.integer(1, 7));
    const auto cols = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(rows), 7));
    const bool ties = t % 2 == 1;
    CostMatrix c(rows, cols);
    for (auto& v : c.data) v = ties ? static_cast<double>(rng.integer(0, 3)) : rng.uniform(0.0, 10.0);
    CostMatrix solved = c;
    if (opt.sabotage) {
      for (auto& v : solved.data) v = -v;
    }
    if (!(hungarian(solved) == oracle::brute_force_assignment(c))) ++mismatches;
  }
  out.push_back(make_result("hungarian == brute force (mismatches)", mismatches, 0.0));

  const LossConfig cfg;
  double worst_perm = 0.0, worst_recompose = 0.0;
  int cost_below_circle = 0;
  for (int t = 0; t < opt.trials; ++t) {
    const auto n_gt = static_cast<std::size_t>(rng.integer(1, 5));
    const auto n_pred = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(n_gt), 8));
    std::vector<GroundTruth> gts;
    for (std::size_t i = 0; i < n_gt; ++i) gts.push_back({random_circle(rng), Label::kForeground, {}});
    std::vector<Prediction> preds;
    for (std::size_t j = 0; j < n_pred; ++j) preds.push_back({random_circle(rng), rng.uniform(0.01, 0.99), {}});

    const CostMatrix cost = match_cost_matrix(preds, gts, cfg);
    const Assignment a = hungarian(cost);
    std::vector<std::size_t> perm(n_pred);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = n_pred; k > 1; --k) std::swap(perm[k - 1], perm[rng.integer(0, static_cast<std::int64_t>(k) - 1)]);
    std::vector<Prediction> shuffled;
    for (auto p : perm) shuffled.push_back(preds[p]);
    const CostMatrix cost2 = match_cost_matrix(shuffled, gts, cfg);
    worst_perm = std::max(worst_perm, std::abs(assignment_cost(cost, a) - assignment_cost(cost2, hungarian(cost2))));

    double circle_part = 0.0;
    for (const auto& p : a.pairs) {
      circle_part += circle_loss(gts[p.gt].circle, preds[p.pred].circle, cfg);
      const double expect = cfg.lambda_focal_match * focal_loss(preds[p.pred].class_prob, true, cfg) +
                            circle_loss(gts[p.gt].circle, preds[p.pred].circle, cfg);
      worst_recompose = std::max(worst_recompose, std::abs(cost(p.gt, p.pred) - expect));
    }
    if (assignment_cost(cost, a) < circle_part) ++cost_below_circle;
  }
  out.push_back(make_result("matched cost under prediction permutation (abs diff)", worst_perm, 1e-12));
  out.push_back(make_result("cost entry recomposition (abs diff)", worst_recompose, 1e-12));
  out.push_back(make_result("matched cost below its circle component", cost_below_circle, 0.0));
  return out;
}

std::vector<CheckResult> run_attn_checks(const CheckOptions& opt) {
  std::vector<CheckResult> out;
  Rng rng(splitmix64(opt.seed ^ 0xa77ULL));
  constexpr int kDim = 16;

  auto random_query = [&](int dim) {
    CircleQuery q;
    q.content = Vec(dim);
    for (int c = 0; c < dim; ++c) q.content(c) = rng.uniform(-1.0, 1.0);
    q.anchor = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.02, 0.5)};
    return q;
  };

  double worst_scale = 0.0;
  for (int t = 0; t < opt.trials; ++t) {
    CircleQuery q = random_query(kDim);
    const double kx = rng.uniform(), ky = rng.uniform();
    const double s = rng.uniform(0.05, 5.0);
    const double unit = modulated_attention(kx, ky, q, q.anchor.r, kDim);
    const double scaled = modulated_attention(kx, ky, q, s * q.anchor.r, kDim);
    const double ratio = (s * q.anchor.r) / q.anchor.r;
    const double expect = (opt.sabotage ? -ratio : ratio) * unit;
    worst_scale = std::max(worst_scale, std::abs(scaled - expect) / std::max(std::abs(expect), 1e-300));
  }
  out.push_back(make_result("modulated attention linear in r_ref/r (relative)", worst_scale, 4.0 * 2.2e-16));

  const int heads = 2, points = 3, dim = 8;
  double worst_linear = 0.0, worst_center = 0.0;
  int locus_violations = 0;
  for (int t = 0; t < opt.trials; ++t) {
    const int h = static_cast<int>(rng.integer(2, 10)), w = static_cast<int>(rng.integer(2, 10));
    FeatureGrid f1(h, w, dim), f2(h, w, dim);
    for (auto& v : f1.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    for (auto& v : f2.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    DeformableParams p;
    p.heads = heads;
    p.points = points;
    for (int m = 0; m < heads; ++m) {
      p.value_proj.push_back(seeded_matrix(dim / heads, dim, rng.bits()));
      p.output_proj.push_back(seeded_matrix(dim, dim / heads, rng.bits()));
    }
    Vec logits(heads * points);
    for (int k = 0; k < heads * points; ++k) logits(k) = rng.uniform(-2.0, 2.0);
    p.attention = softmax_heads(logits, heads, points);
    p.offsets = cda_reference_init(t % 2 ? CdaInit::kCircle : CdaInit::kRandom, heads, points, rng.bits());
    const CircleQuery q = random_query(dim);
    const double r_ref = rng.uniform(0.01, 0.99);

    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    FeatureGrid mix(h, w, dim);
    for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = static_cast<float>(a * f1.data[i] + b * f2.data[i]);
    // Mixing happens in float storage, so compare against the stored mixture.
    FeatureGrid resid(h, w, dim);
    for (std::size_t i = 0; i < mix.data.size(); ++i) {
      resid.data[i] = static_cast<float>(mix.data[i] - (a * f1.data[i] + b * f2.data[i]));
    }
    const Vec lhs = circle_deformable_attention(q, p, r_ref, mix);
    const Vec rhs = a * circle_deformable_attention(q, p, r_ref, f1) +
                    b * circle_deformable_attention(q, p, r_ref, f2) +
                    circle_deformable_attention(q, p, r_ref, resid);
    worst_linear = std::max(worst_linear, (lhs - rhs).cwiseAbs().maxCoeff());

    DeformableParams centered = p;
    std::fill(centered.offsets.radius.begin(), centered.offsets.radius.end(), 0.0);
    const Vec center_out = circle_deformable_attention(q, centered, r_ref, f1);
    const Vec at_center = bilinear_sample(f1, q.anchor.x * w - 0.5, q.anchor.y * h - 0.5);
    Vec expect = Vec::Zero(dim);
    for (int m = 0; m < heads; ++m) expect += p.output_proj[m] * (p.value_proj[m] * at_center);
    worst_center = std::max(worst_center, (center_out - expect).cwiseAbs().maxCoeff());

    const double limit = r_ref * q.anchor.r * std::min(h, w);
    const double cx = q.anchor.x * w - 0.5, cy = q.anchor.y * h - 0.5;
    for (const auto& s : deformable_sample_points(q.anchor, p.offsets, r_ref, h, w)) {
      if (std::hypot(s.x - cx, s.y - cy) > limit * (1.0 + 1e-12)) ++locus_violations;
    }
  }
  out.push_back(make_result("deformable attention linear in F (abs diff)", worst_linear, 1e-9));
  out.push_back(make_result("zero radius offsets sample the anchor center (abs diff)", worst_center, 1e-12));
  out.push_back(make_result("sample points outside r_ref-scaled anchor", locus_violations, 0.0));

  int refine_violations = 0;
  double worst_identity = 0.0;
  for (int t = 0; t < opt.trials; ++t) {
    const Circle anchor{rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99)};
    const Circle same = refine_anchor(anchor, {0.0, 0.0, 0.0});
    worst_identity = std::max({worst_identity, std::abs(same.x - anchor.x), std::abs(same.y - anchor.y),
                               std::abs(same.r - anchor.r)});
    const Circle moved = refine_anchor(anchor, {rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)});
    for (double v : {moved.x, moved.y, moved.r}) refine_violations += !(v > 0.0 && v < 1.0);
  }
  out.push_back(make_result("refine_anchor zero delta identity (abs diff)", worst_identity, 1e-9));
  out.push_back(make_result("refined anchors outside (0,1)^3", refine_violations, 0.0));
  return out;
}

std::vector<CheckResult> run_check_suite(const std::string& suite, const CheckOptions& opt) {
  if (suite == "geom") return run_geom_checks(opt);
  if (suite == "match") return run_match_checks(opt);
  if (suite == "attn") return run_attn_checks(opt);
  if (suite == "all") {
    auto out = run_geom_checks(opt);
    for (auto&& r : run_match_checks(opt)) out.push_back(std::move(r));
    for (auto&& r : run_attn_checks(opt)) out.push_back(std::move(r));
    return out;
  }
  throw Error("unknown check suite '" + suite + "' (expected geom, match, attn or all)");
}

}  // namespace circdet
