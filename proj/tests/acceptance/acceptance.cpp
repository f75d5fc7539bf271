// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
//
// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "cli_runner.hpp"
#include "circdet/attention.hpp"
#include "circdet/errors.hpp"
#include "circdet/evalap.hpp"
#include "circdet/formats.hpp"
#include "circdet/geometry.hpp"
#include "circdet/harness.hpp"
#include "circdet/hungarian.hpp"
#include "circdet/losses.hpp"
#include "circdet/oracle.hpp"
#include "circdet/random.hpp"
#include "circdet/segloss.hpp"
#include "circdet/synthgen.hpp"

namespace circdet {
namespace {

using namespace circdet::testing;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Criterion = std::function<void(Outcome&)>;

bool run_criterion(int id, const char* name, double budget_s, const Criterion& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    out.require(false, "runtime " + std::to_string(secs) + " s over budget " + std::to_string(budget_s) + " s");
  }
  std::printf("[%s] %d. %-34s %7.2fs  %s\n", out.pass ? "PASS" : "FAIL", id, name, secs,
              out.detail.str().c_str());
  std::fflush(stdout);
  return out.pass;
}

// 1. Exact areas against hit-or-miss estimates.
void geometry_vs_oracle(Outcome& out) {
  Rng rng(1001);
  double worst_area = 0.0, worst_g = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Circle a = random_circle(rng, 0.05, 0.3);
    const Circle b{a.x + rng.uniform(-0.4, 0.4), a.y + rng.uniform(-0.4, 0.4), rng.uniform(0.05, 0.3)};
    const auto area = oracle::mc_intersection_area(a, b, 1'000'000, 7000 + t);
    const auto g = oracle::mc_gciou(a, b, 1'000'000, 9000 + t);
    const double da = std::abs(area.estimate - intersection_area(a, b));
    const double dg = std::abs(g.estimate - gciou(a, b));
    // Zero stderr means the estimator saw no variance (e.g. disjoint pair):
    // the exact value must then agree to rounding.
    const double za = area.std_error > 0 ? da / area.std_error : (da < 1e-12 ? 0 : INFINITY);
    const double zg = g.std_error > 0 ? dg / g.std_error : (dg < 1e-12 ? 0 : INFINITY);
    worst_area = std::max(worst_area, za);
    worst_g = std::max(worst_g, zg);
  }
  out.detail << "max |z| area " << worst_area << ", gciou " << worst_g << " (limit 4)";
  out.require(worst_area <= 4.0, "intersection area outside 4 sigma");
  out.require(worst_g <= 4.0, "gciou outside 4 sigma");
}

// 2. Analytic gradient against central differences.
void gradient_vs_fd(Outcome& out) {
  Rng rng(2002);
  int used = 0, singular = 0;
  double worst = 0.0;
  while (used < 500) {
    const Circle a = random_circle(rng, 0.05, 0.3);
    const Circle b{a.x + rng.uniform(-0.4, 0.4), a.y + rng.uniform(-0.4, 0.4), rng.uniform(0.05, 0.3)};
    CircleGrad g;
    try {
      g = grad_gciou(a, b);
    } catch (const NonDifferentiablePoint&) {
      ++singular;
      continue;
    }
    const double p[3] = {a.x, a.y, a.r};
    const auto fd = oracle::finite_diff_grad(
        [&](std::span<const double> v) { return gciou({v[0], v[1], v[2]}, b); }, p, 1e-6);
    worst = std::max(worst, relative_error({g[0], g[1], g[2]}, fd));
    ++used;
  }
  out.detail << "500 pairs, " << singular << " singular skipped, max rel err " << worst << " (limit 1e-5)";
  out.require(worst < 1e-5, "gradient disagrees with finite differences");
}

// 3. Hungarian against exhaustive search, half the matrices tie-heavy.
void hungarian_vs_brute(Outcome& out) {
  Rng rng(3003);
  int mismatches = 0, ties = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto rows = static_cast<std::size_t>(rng.integer(1, 7));
    const auto cols = static_cast<std::size_t>(rng.integer(static_cast<std::int64_t>(rows), 7));
    CostMatrix c(rows, cols);
    const bool tie = t % 2 == 0;
    ties += tie;
    for (auto& v : c.data) v = tie ? static_cast<double>(rng.integer(0, 2)) : rng.uniform(-5, 5);
    if (hungarian(c) != oracle::brute_force_assignment(c)) ++mismatches;
  }
  out.detail << "1000 matrices (" << ties << " with duplicated costs), " << mismatches << " mismatches";
  out.require(mismatches == 0, "assignment differs from brute force");
}

// 4. gCIoU pulls disjoint predictions in; pure cIoU cannot.
void optimization_contrast(Outcome& out) {
  const fs::path dir = scratch_dir("acc_opt");
  write_text(dir / "cfg.json", R"({"num_images": 1, "seed": 0})");
  auto r = run_cli("gen --config " + q(dir / "cfg.json") + " --out " + q(dir / "scene"), dir);
  out.require(r.exit_code == 0, "gen failed: " + r.output);
  double mean[2] = {0, 0};
  const char* losses[2] = {"gciou", "ciou"};
  for (int k = 0; k < 2; ++k) {
    const fs::path rep = dir / (std::string(losses[k]) + ".json");
    r = run_cli(std::string("optimize --loss ") + losses[k] + " --steps 2000 --scene " + q(dir / "scene") +
                    " --out " + q(rep),
                dir);
    out.require(r.exit_code == 0, std::string("optimize ") + losses[k] + " failed: " + r.output);
    const auto j = read_json(rep);
    out.require(j["targets"].size() == 5, "scene does not hold 5 circles");
    mean[k] = j["final_mean_ciou"].get<double>();
  }
  out.detail << "mean matched cIoU: gciou " << mean[0] << " (> 0.95), ciou " << mean[1] << " (< 0.05)";
  out.require(mean[0] > 0.95, "gciou did not converge");
  out.require(mean[1] < 0.05, "ciou moved the predictions");
}

CircleQuery random_query(Rng& rng, int dim) {
  CircleQuery q;
  q.content = Vec(dim);
  for (int i = 0; i < dim; ++i) q.content(i) = rng.uniform(-1.0, 1.0);
  q.anchor = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.02, 0.5)};
  return q;
}

DeformableParams random_params(Rng& rng, int heads, int points, int dim) {
  DeformableParams p;
  p.heads = heads;
  p.points = points;
  for (int m = 0; m < heads; ++m) {
    p.value_proj.push_back(seeded_matrix(dim / heads, dim, rng.bits()));
    p.output_proj.push_back(seeded_matrix(dim, dim / heads, rng.bits()));
  }
  Vec logits(heads * points);
  for (int k = 0; k < heads * points; ++k) logits(k) = rng.uniform(-2, 2);
  p.attention = softmax_heads(logits, heads, points);
  p.offsets = cda_reference_init(CdaInit::kRandom, heads, points, rng.bits());
  return p;
}

// 5. Modulation scaling, linearity in the feature map, sampling locus.
void attention_invariants(Outcome& out) {
  Rng rng(5005);
  const int d = 8;
  int scaling_bad = 0;
  for (int t = 0; t < 10000; ++t) {
    const CircleQuery q = random_query(rng, d);
    const double kx = rng.uniform(), ky = rng.uniform();
    const double unit = modulated_attention(kx, ky, q, q.anchor.r, d);
    const double r_ref = rng.uniform(0.01, 1.0);
    // Bit-exact: r / r is 1, so `unit` is the unmodulated logit.
    scaling_bad += modulated_attention(kx, ky, q, r_ref, d) != unit * (r_ref / q.anchor.r);
  }

  double lin_worst = 0.0, center_worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    FeatureGrid f1(7, 9, d), f2(7, 9, d);
    for (auto& v : f1.data) v = static_cast<float>(rng.integer(-64, 64)) / 64.0f;
    for (auto& v : f2.data) v = static_cast<float>(rng.integer(-64, 64)) / 64.0f;
    DeformableParams p = random_params(rng, 2, 4, d);
    const CircleQuery q = random_query(rng, d);
    const double a = static_cast<double>(rng.integer(-3, 3)) / 4, b = static_cast<double>(rng.integer(-3, 3)) / 4;
    FeatureGrid mix(7, 9, d);
    for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = static_cast<float>(a * f1.data[i] + b * f2.data[i]);
    const Vec lhs = circle_deformable_attention(q, p, 0.5, mix);
    const Vec rhs = a * circle_deformable_attention(q, p, 0.5, f1) + b * circle_deformable_attention(q, p, 0.5, f2);
    lin_worst = std::max(lin_worst, (lhs - rhs).cwiseAbs().maxCoeff());

    // All radial offsets zero: every point samples the anchor center.
    for (auto& r : p.offsets.radius) r = 0.0;
    const Vec center = bilinear_sample(f1, q.anchor.x * f1.width - 0.5, q.anchor.y * f1.height - 0.5);
    Vec expect = Vec::Zero(d);
    for (int m = 0; m < p.heads; ++m) expect += p.output_proj[m] * (p.value_proj[m] * center);
    center_worst = std::max(center_worst, (circle_deformable_attention(q, p, 0.5, f1) - expect).cwiseAbs().maxCoeff());
  }

  long violations = 0;
  for (int t = 0; t < 100000; ++t) {
    const int h = static_cast<int>(rng.integer(1, 128)), w = static_cast<int>(rng.integer(1, 128));
    const Circle anchor{rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99)};
    const double r_ref = rng.uniform(0.01, 1.0);
    const auto off = cda_reference_init(t % 2 ? CdaInit::kCircle : CdaInit::kRandom, 4, 4, rng.bits());
    const double cx = anchor.x * w - 0.5, cy = anchor.y * h - 0.5;
    const double limit = r_ref * anchor.r * std::min(h, w);
    // Relative 1e-12 slack covers rounding in cos / sin / hypot only.
    for (const auto& s : deformable_sample_points(anchor, off, r_ref, h, w)) {
      violations += std::hypot(s.x - cx, s.y - cy) > limit * (1 + 1e-12);
    }
  }
  out.detail << "(a) " << scaling_bad << " inexact of 1e4; (b) linearity " << lin_worst << ", center " << center_worst
             << " (limit 1e-9); (c) " << violations << " locus violations in 1e5";
  out.require(scaling_bad == 0, "modulated attention not exactly proportional");
  out.require(lin_worst <= 1e-9, "deformable attention not linear in F");
  out.require(center_worst <= 1e-9, "zero offsets do not reduce to the center sample");
  out.require(violations == 0, "sample point outside the scaled anchor");
}

// 6. Anchor refinement contract.
void refinement_contract(Outcome& out) {
  Rng rng(6006);
  double ident = 0.0;
  long out_of_range = 0;
  for (int t = 0; t < 1'000'000; ++t) {
    const Circle a{rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99)};
    const Circle same = refine_anchor(a, {0, 0, 0});
    ident = std::max({ident, std::abs(same.x - a.x), std::abs(same.y - a.y), std::abs(same.r - a.r)});
    const Circle r = refine_anchor(a, {rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)});
    out_of_range += !(r.x > 0 && r.x < 1 && r.y > 0 && r.y < 1 && r.r > 0 && r.r < 1);
  }
  out.detail << "identity err " << ident << " (limit 1e-9); " << out_of_range << " of 1e6 outside (0,1)^3";
  out.require(ident <= 1e-9, "zero delta is not the identity");
  out.require(out_of_range == 0, "refined anchor left (0,1)^3");
}

// 7. AP evaluator against the hand-derived toy report, and perfect input.
void ap_conformance(Outcome& out) {
  const fs::path fx = CIRCDET_FIXTURES;
  const auto gt = decode_annotations(slurp(fx / "toy_gt.json"));
  const auto pred = decode_predictions(slurp(fx / "toy_pred.json"));
  const auto want = read_json(fx / "toy_expected.json");
  const ApReport rep = ap_summary(to_detection_set(pred), to_truth_set(gt));
  const std::pair<const char*, double> fields[] = {
      {"ap", rep.ap}, {"ap50", rep.ap50}, {"ap75", rep.ap75}, {"ap_s", rep.ap_s}, {"ap_m", rep.ap_m}};
  double toy_worst = 0.0;
  for (const auto& [key, v] : fields) toy_worst = std::max(toy_worst, std::abs(v - want[key].get<double>()));

  // A generated scene holding both small and medium circles, so neither
  // size bucket is empty.
  GenConfig g;
  g.height = g.width = 160;
  g.r_min = 6;
  g.r_max = 30;
  g.n_min = 4;
  g.n_max = 8;
  g.seed = 7;
  g.num_images = 3;
  AnnotationFile file;
  std::vector<PredictionRecord> perfect;
  int n_small = 0, n_medium = 0;
  for (const auto& s : generate_dataset(g)) {
    file.images.push_back({s.truth.image_id, s.truth.height, s.truth.width});
    for (const auto& c : s.truth.circles) {
      file.annotations.push_back({s.truth.image_id, c});
      perfect.push_back({s.truth.image_id, c, 0.5 + 0.01 * c.r});
      (circle_area(c) < kSmallAreaMax ? n_small : n_medium)++;
    }
  }
  const ApReport p = ap_summary(to_detection_set(perfect), to_truth_set(file));
  out.detail << "toy max |diff| " << toy_worst << " (limit 1e-9); perfect (" << n_small << " S, " << n_medium
             << " M): ap " << p.ap << " ap50 " << p.ap50 << " ap75 " << p.ap75 << " ap_s " << p.ap_s << " ap_m " << p.ap_m;
  out.require(toy_worst <= 1e-9, "toy fixture report differs");
  out.require(n_small > 0 && n_medium > 0, "generated scene lacks a size bucket");
  out.require(p.ap == 1.0 && p.ap50 == 1.0 && p.ap75 == 1.0 && p.ap_s == 1.0 && p.ap_m == 1.0,
              "perfect predictions below 1.0");
}

// 8. Loss identities and tabulated examples.
void loss_identities(Outcome& out) {
  LossConfig half;
  half.gamma = 0.0;
  half.alpha = 0.5;
  double focal_worst = 0.0;
  for (int k = 1; k < 10001; ++k) {
    const double pr = k / 10001.0;
    focal_worst = std::max(focal_worst, std::abs(focal_loss(pr, true, half) - 0.5 * -std::log(pr)));
    focal_worst = std::max(focal_worst, std::abs(focal_loss(pr, false, half) - 0.5 * -std::log(1 - pr)));
  }

  auto patch = [](int positives, int offset) {
    MaskPatch m;
    for (int k = 0; k < positives; ++k) m.cells[offset + k] = 1.0;
    return m;
  };
  double ex_worst = 0.0;
  auto check = [&](double got, double want) { ex_worst = std::max(ex_worst, std::abs(got - want)); };
  const LossConfig cfg;
  const double clamped_hit = -std::log(1 - 1e-6);  // per-cell bce of a perfect binary guess
  check(dice_loss(patch(100, 0), patch(100, 0)), 0.0);
  check(dice_loss(patch(50, 0), patch(50, 50)), 1.0 - 1.0 / 101.0);
  check(dice_loss(MaskPatch{}, MaskPatch{}), 0.0);
  check(bce_loss(patch(100, 0), patch(100, 0)), clamped_hit);
  MaskPatch halfp;
  halfp.cells.fill(0.5);
  check(bce_loss(patch(300, 10), halfp), std::log(2.0));
  Rng rng(5);
  MaskPatch m, mh;
  for (auto& v : m.cells) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
  for (auto& v : mh.cells) v = rng.uniform();
  double bce = 0.0, inter = 0.0, sm = 0.0, smh = 0.0;
  for (int k = 0; k < kMaskCells; ++k) {
    const double p = std::clamp(mh.cells[k], 1e-6, 1 - 1e-6);
    bce -= m.cells[k] * std::log(p) + (1 - m.cells[k]) * std::log(1 - p);
    inter += m.cells[k] * mh.cells[k];
    sm += m.cells[k];
    smh += mh.cells[k];
  }
  bce /= kMaskCells;
  const double dice = 1 - (2 * inter + 1) / (sm + smh + 1);
  check(bce_loss(m, mh), bce);
  check(dice_loss(m, mh), dice);
  check(seg_loss(m, mh, cfg), 8 * dice + 2 * bce);
  check(seg_loss(m, m, cfg), 8 * 0.0 + 2 * clamped_hit);
  LossConfig no_dice;
  no_dice.lambda_dice = 0.0;
  check(seg_loss(m, mh, no_dice), 2 * bce);
  out.detail << "focal vs half-BCE " << focal_worst << " (limit 1e-12); examples " << ex_worst << " (limit 1e-9)";
  out.require(focal_worst <= 1e-12, "focal gamma=0 is not half BCE");
  out.require(ex_worst <= 1e-9, "dice / bce / seg example off");
}

// 9. Reproducible generation and exact file round trips.
void determinism_and_formats(Outcome& out) {
  const fs::path dir = scratch_dir("acc_fmt");
  write_text(dir / "cfg.json", R"({"num_images": 4, "seed": 123, "n_min": 1, "n_max": 7})");
  for (const char* sub : {"a", "b"}) {
    const auto r = run_cli("gen --config " + q(dir / "cfg.json") + " --out " + q(dir / sub), dir);
    out.require(r.exit_code == 0, "gen failed: " + r.output);
  }
  int files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    differ += slurp(e.path()) != slurp(dir / "b" / e.path().filename());
  }

  // JSON: file -> records -> file is the identity, and records match the library bit for bit.
  const std::string text = slurp(dir / "a" / "annotations.json");
  const auto ann = decode_annotations(text);
  bool json_exact = encode_annotations(ann) == text;
  GenConfig g;
  g.num_images = 4;
  g.seed = 123;
  g.n_min = 1;
  g.n_max = 7;
  std::size_t k = 0;
  bool grids_exact = true;
  for (const auto& s : generate_dataset(g)) {
    for (const auto& c : s.truth.circles) json_exact = json_exact && k < ann.annotations.size() && ann.annotations[k++].circle == c;
    const auto grid = load_fgrid(dir / "a" / ("grid_" + std::to_string(s.truth.image_id) + ".fgrid"));
    grids_exact = grids_exact && grid.data == s.features.data &&
                  encode_fgrid(grid) == read_file(dir / "a" / ("grid_" + std::to_string(s.truth.image_id) + ".fgrid"));
  }
  Rng rng(9);
  std::vector<PredictionRecord> preds;
  for (int i = 0; i < 500; ++i) preds.push_back({i % 4, {rng.uniform(0, 999), rng.uniform(0, 999), rng.uniform(0.01, 99)}, rng.uniform()});
  json_exact = json_exact && decode_predictions(encode_predictions(preds)) == preds;

  // Truncation: every cut inside the payload points at the first incomplete float.
  const Bytes full = read_file(dir / "a" / "grid_0.fgrid");
  int wrong_offset = 0;
  for (std::size_t cut = 0; cut < full.size(); cut += (cut < 64 ? 1 : 97)) {
    const std::size_t expect = cut < 16 ? cut / 4 * 4 : 16 + (cut - 16) / 4 * 4;
    try {
      decode_fgrid(Bytes(full.begin(), full.begin() + cut));
      ++wrong_offset;
    } catch (const FormatError& e) {
      wrong_offset += !(e.offset() && *e.offset() == expect);
    }
  }
  out.detail << files << " files, " << differ << " differ; JSON exact " << json_exact << ", FGRID exact " << grids_exact
             << "; " << wrong_offset << " wrong truncation offsets";
  out.require(files == 9 && differ == 0, "gen output not bit-identical");
  out.require(json_exact, "JSON round trip not exact");
  out.require(grids_exact, "FGRID round trip not exact");
  out.require(wrong_offset == 0, "truncation offset wrong");
}

}  // namespace
}  // namespace circdet

int main() {
  using namespace circdet;
  int failed = 0;
  failed += !run_criterion(1, "geometry vs Monte Carlo oracle", 60, geometry_vs_oracle);
  failed += !run_criterion(2, "gradient vs finite differences", 10, gradient_vs_fd);
  failed += !run_criterion(3, "Hungarian vs brute force", 30, hungarian_vs_brute);
  failed += !run_criterion(4, "gciou vs ciou optimization", 120, optimization_contrast);
  failed += !run_criterion(5, "attention invariants", 60, attention_invariants);
  failed += !run_criterion(6, "anchor refinement contract", 30, refinement_contract);
  failed += !run_criterion(7, "AP evaluator conformance", 5, ap_conformance);
  failed += !run_criterion(8, "loss identities", 0, loss_identities);
  failed += !run_criterion(9, "determinism and round trips", 0, determinism_and_formats);
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
