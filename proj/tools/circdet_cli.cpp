// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
//
// circdet: scene generation, oracle checks, the regression-loss demo, a
// decoder forward demo and AP evaluation.
//
// Exit codes: 0 success, 1 check failure (or diverged optimization),
// 2 usage / format / configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "circdet/errors.hpp"
#include "circdet/formats.hpp"
#include "circdet/harness.hpp"
#include "circdet/synthgen.hpp"
#include "circdet/weights_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace circdet {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

const char* kIndexName = "annotations.json";

std::string grid_name(std::int64_t id) { return "grid_" + std::to_string(id) + ".fgrid"; }
std::string masks_name(std::int64_t id) { return "masks_" + std::to_string(id) + ".fgrid"; }

nlohmann::json parse_json_file(const fs::path& path) {
  const Bytes raw = read_file(path);
  try {
    return nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(),
                      e.byte > 0 ? std::optional<std::uint64_t>(e.byte - 1) : std::nullopt);
  }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config field '") + key + "': " + e.what());
  }
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("config: expected a JSON object");
  static const char* known[] = {"height", "width", "n_min", "n_max", "r_min", "r_max",
                                "max_overlap_ciou", "seed", "depth", "num_images"};
  for (const auto& item : j.items()) {
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
      throw FormatError("config: unknown field '" + item.key() + "'");
    }
  }
  GenConfig cfg;
  read_field(j, "height", cfg.height);
  read_field(j, "width", cfg.width);
  read_field(j, "n_min", cfg.n_min);
  read_field(j, "n_max", cfg.n_max);
  read_field(j, "r_min", cfg.r_min);
  read_field(j, "r_max", cfg.r_max);
  read_field(j, "max_overlap_ciou", cfg.max_overlap_ciou);
  read_field(j, "seed", cfg.seed);
  read_field(j, "depth", cfg.depth);
  read_field(j, "num_images", cfg.num_images);
  return cfg;
}

ordered_json circle_json(const Circle& c) { return {{"x", c.x}, {"y", c.y}, {"r", c.r}}; }

void write_json(const fs::path& path, const ordered_json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, j.dump(2) + "\n");
}

// Loads one image of a generated scene directory: its truth circles (pixel
// units) and feature grid. `image` < 0 picks the first listed image.
struct LoadedImage {
  ImageInfo info;
  std::vector<Circle> circles;
  fs::path grid_path;
};

LoadedImage load_scene_image(const fs::path& dir, std::int64_t image) {
  const Bytes raw = read_file(dir / kIndexName);
  const AnnotationFile ann = decode_annotations(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
  if (ann.images.empty()) throw Error("scene " + dir.string() + " holds no images");
  LoadedImage out;
  bool found = false;
  for (const auto& im : ann.images) {
    if (image < 0 || im.id == image) {
      out.info = im;
      found = true;
      break;
    }
  }
  if (!found) throw Error("scene has no image with id " + std::to_string(image));
  for (const auto& a : ann.annotations) {
    if (a.image_id == out.info.id) out.circles.push_back(a.circle);
  }
  out.grid_path = dir / grid_name(out.info.id);
  return out;
}

// ---------------------------------------------------------------------------

int cmd_gen(const fs::path& config_path, const fs::path& out_dir) {
  const GenConfig cfg = gen_config_from_json(parse_json_file(config_path));
  const auto scenes = generate_dataset(cfg);
  fs::create_directories(out_dir);
  AnnotationFile index;
  for (const auto& s : scenes) {
    const auto& t = s.truth;
    index.images.push_back({t.image_id, t.height, t.width});
    for (const auto& c : t.circles) index.annotations.push_back({t.image_id, c});
    save_fgrid(out_dir / grid_name(t.image_id), s.features);
    FeatureGrid masks(t.height, t.width, static_cast<int>(t.masks.size()));
    for (std::size_t k = 0; k < t.masks.size(); ++k) {
      for (int i = 0; i < t.height; ++i) {
        for (int j = 0; j < t.width; ++j) {
          masks.at(i, j, static_cast<int>(k)) = t.masks[k].data[static_cast<std::size_t>(i) * t.width + j];
        }
      }
    }
    save_fgrid(out_dir / masks_name(t.image_id), masks);
  }
  write_file_atomic(out_dir / kIndexName, encode_annotations(index));
  std::printf("wrote %zu scene(s) to %s\n", scenes.size(), out_dir.string().c_str());
  return kExitOk;
}

int cmd_check(const std::string& suite, const CheckOptions& opt) {
  const auto results = run_check_suite(suite, opt);
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %-58s value=%.3e tol=%.3e margin=%.3e%s%s\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.value, r.tolerance, r.tolerance - r.value,
                r.detail.empty() ? "" : "  ", r.detail.c_str());
    all = all && r.pass;
  }
  std::printf("%s: %zu checks, %s\n", suite.c_str(), results.size(), all ? "all passed" : "FAILED");
  return all ? kExitOk : kExitCheckFailed;
}

int cmd_optimize(const OptimizeConfig& cfg, const fs::path& scene, std::int64_t image,
                 const fs::path& out) {
  const LoadedImage img = load_scene_image(scene, image);
  const ImageFrame frame{static_cast<double>(img.info.height), static_cast<double>(img.info.width)};
  OptimizeConfig run_cfg = cfg;
  run_cfg.frame = frame;
  const std::vector<Circle>& targets = img.circles;
  const OptimizeReport rep = optimize_circles(targets, run_cfg);
  ordered_json j;
  j["loss"] = to_string(rep.loss);
  j["image_id"] = img.info.id;
  j["steps"] = cfg.steps;
  j["lr"] = cfg.lr;
  j["final_loss"] = rep.final_loss;
  j["final_mean_ciou"] = rep.final_mean_ciou;
  j["tail_monotone"] = rep.tail_monotone;
  j["targets"] = ordered_json::array();
  for (const auto& c : targets) j["targets"].push_back(circle_json(c));
  j["initial_predictions"] = ordered_json::array();
  for (const auto& c : rep.initial_predictions) j["initial_predictions"].push_back(circle_json(c));
  j["final_predictions"] = ordered_json::array();
  for (const auto& c : rep.final_predictions) j["final_predictions"].push_back(circle_json(c));
  j["trajectory"] = ordered_json::array();
  for (const auto& s : rep.trajectory) {
    j["trajectory"].push_back({{"step", s.step}, {"loss", s.loss}, {"mean_ciou", s.mean_ciou}});
  }
  write_json(out, j);
  std::printf("%s: final loss %.6g, mean matched cIoU %.6f after %d steps\n",
              to_string(rep.loss).c_str(), rep.final_loss, rep.final_mean_ciou, cfg.steps);
  return kExitOk;
}

int cmd_forward(const std::string& weights_path, const fs::path& scene, std::int64_t image,
                const ForwardConfig& cfg, CdaInit init, int dim, const fs::path& out) {
  const LoadedImage img = load_scene_image(scene, image);
  const FeatureGrid grid = load_fgrid(img.grid_path);
  DecoderWeights w = weights_path.empty()
                         ? seeded_decoder_weights(dim, cfg.layers, 8, 4, init, cfg.seed)
                         : load_decoder_weights(weights_path);
  validate_decoder_weights(w);
  if (w.dim != grid.depth) {
    throw ShapeError("forward: weights expect depth " + std::to_string(w.dim) + ", grid has " +
                     std::to_string(grid.depth));
  }
  const ForwardReport rep = run_forward(grid, w, cfg);
  ordered_json j;
  j["image_id"] = img.info.id;
  j["variant"] = cfg.variant == AttentionVariant::kDense ? "dense" : "deformable";
  j["layers"] = ordered_json::array();
  for (const auto& layer : rep.anchors) {
    ordered_json a = ordered_json::array();
    for (const auto& c : layer) a.push_back(circle_json(c));
    j["layers"].push_back(std::move(a));
  }
  j["predictions"] = ordered_json::array();
  for (const auto& d : rep.detections) {
    ordered_json p = {{"image_id", img.info.id}, {"x", d.circle.x}, {"y", d.circle.y}, {"r", d.circle.r}, {"score", d.score}};
    j["predictions"].push_back(std::move(p));
  }
  write_json(out, j);
  std::printf("forward: %d layers, %zu detections\n", cfg.layers, rep.detections.size());
  return kExitOk;
}

int cmd_eval(const fs::path& pred_path, const fs::path& gt_path, const fs::path& out) {
  const Bytes pr = read_file(pred_path), gr = read_file(gt_path);
  const auto preds = decode_predictions(std::string_view(reinterpret_cast<const char*>(pr.data()), pr.size()));
  const auto gts = decode_annotations(std::string_view(reinterpret_cast<const char*>(gr.data()), gr.size()));
  const ApReport rep = ap_summary(to_detection_set(preds), to_truth_set(gts));
  ordered_json j;
  j["ap"] = rep.ap;
  j["ap50"] = rep.ap50;
  j["ap75"] = rep.ap75;
  j["ap_s"] = rep.ap_s;
  j["ap_m"] = rep.ap_m;
  j["thresholds"] = rep.thresholds;
  j["ap_per_thresh"] = rep.ap_per_thresh;
  j["ap_s_per_thresh"] = rep.ap_s_per_thresh;
  j["ap_m_per_thresh"] = rep.ap_m_per_thresh;
  j["warnings"] = rep.warnings;
  write_json(out, j);
  for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("AP %.4f  AP50 %.4f  AP75 %.4f  AP_S %.4f  AP_M %.4f\n", rep.ap, rep.ap50, rep.ap75,
              rep.ap_s, rep.ap_m);
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"circle detection kernels and verification harness"};
  app.require_subcommand(1);

  fs::path gen_config, gen_out;
  auto* gen = app.add_subcommand("gen", "generate synthetic scenes");
  gen->add_option("--config", gen_config, "JSON file with GenConfig fields")->required();
  gen->add_option("--out", gen_out, "output directory")->required();

  std::string suite = "all";
  CheckOptions copt;
  auto* check = app.add_subcommand("check", "run oracle check suites");
  check->add_option("--suite", suite)->check(CLI::IsMember({"geom", "match", "attn", "all"}));
  check->add_option("--seed", copt.seed);
  check->add_option("--trials", copt.trials)->check(CLI::PositiveNumber);
  check->add_flag("--sabotage", copt.sabotage, "flip one sign per suite (must fail)");

  OptimizeConfig ocfg;
  std::string loss = "gciou";
  fs::path opt_scene, opt_out;
  std::int64_t opt_image = -1;
  auto* optimize = app.add_subcommand("optimize", "gradient descent on circles through matching");
  optimize->add_option("--loss", loss)->check(CLI::IsMember({"gciou", "ciou", "l1"}));
  optimize->add_option("--steps", ocfg.steps)->check(CLI::NonNegativeNumber);
  optimize->add_option("--lr", ocfg.lr)->check(CLI::PositiveNumber);
  optimize->add_option("--scene", opt_scene, "scene directory written by gen")->required();
  optimize->add_option("--image", opt_image, "image id (default: first)");
  optimize->add_option("--out", opt_out, "report JSON")->required();

  ForwardConfig fcfg;
  std::string weights_path, variant = "deformable", init = "cda-r";
  fs::path fwd_scene, fwd_out;
  std::int64_t fwd_image = -1;
  int dim = 32;
  auto* forward = app.add_subcommand("forward", "decoder forward pass demo");
  forward->add_option("--weights", weights_path, "FGRC weight bundle (default: seeded)");
  forward->add_option("--scene", fwd_scene, "scene directory written by gen")->required();
  forward->add_option("--image", fwd_image, "image id (default: first)");
  forward->add_option("--layers", fcfg.layers)->check(CLI::NonNegativeNumber);
  forward->add_option("--variant", variant)->check(CLI::IsMember({"dense", "deformable"}));
  forward->add_option("--init", init)->check(CLI::IsMember({"cda-r", "cda-c"}));
  forward->add_option("--queries", fcfg.num_queries)->check(CLI::PositiveNumber);
  forward->add_option("--dim", dim, "model width for seeded weights")->check(CLI::PositiveNumber);
  forward->add_option("--seed", fcfg.seed);
  forward->add_option("--out", fwd_out, "report JSON")->required();

  fs::path pred_path, gt_path, eval_out;
  auto* eval = app.add_subcommand("eval", "COCO-style AP over cIoU thresholds");
  eval->add_option("--pred", pred_path)->required();
  eval->add_option("--gt", gt_path)->required();
  eval->add_option("--out", eval_out, "report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*gen) return cmd_gen(gen_config, gen_out);
  if (*check) return cmd_check(suite, copt);
  if (*optimize) {
    ocfg.loss = parse_regression_loss(loss);
    return cmd_optimize(ocfg, opt_scene, opt_image, opt_out);
  }
  if (*forward) {
    fcfg.variant = variant == "dense" ? AttentionVariant::kDense : AttentionVariant::kDeformable;
    return cmd_forward(weights_path, fwd_scene, fwd_image, fcfg,
                       init == "cda-c" ? CdaInit::kCircle : CdaInit::kRandom, dim, fwd_out);
  }
  if (*eval) return cmd_eval(pred_path, gt_path, eval_out);
  return kExitUsage;
}

}  // namespace
}  // namespace circdet

int main(int argc, char** argv) {
  try {
    return circdet::run(argc, argv);
  } catch (const circdet::DivergedLoss& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return circdet::kExitCheckFailed;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return circdet::kExitUsage;
  }
}
