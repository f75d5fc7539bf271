// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

// On-disk formats.
//
// FGRID tensor (little-endian):
//   "FGRD" | u32 H | u32 W | u32 D | H*W*D f32, row-major, channel-last
// Named tensor container:
//   "FGRC" | u32 count | count x (u16 name length | UTF-8 name | FGRID record)
//
// Annotation / prediction files are JSON; numbers are written with 9
// significant digits, or 17 when 9 would not read back as the same double.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "circdet/evalap.hpp"
#include "circdet/feature_grid.hpp"

namespace circdet {

using Bytes = std::vector<std::uint8_t>;
using NamedTensors = std::vector<std::pair<std::string, FeatureGrid>>;

Bytes encode_fgrid(const FeatureGrid& t);
/// Decodes exactly one record spanning the whole buffer.
FeatureGrid decode_fgrid(std::span<const std::uint8_t> bytes);

Bytes encode_fgrc(const NamedTensors& tensors);
NamedTensors decode_fgrc(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_file_atomic(const std::filesystem::path& path, const Bytes& contents);

void save_fgrid(const std::filesystem::path& path, const FeatureGrid& t);
FeatureGrid load_fgrid(const std::filesystem::path& path);
void save_fgrc(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_fgrc(const std::filesystem::path& path);

struct ImageInfo {
  std::int64_t id = 0;
  int height = 0;
  int width = 0;

  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct Annotation {
  std::int64_t image_id = 0;
  Circle circle;  // pixel units

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct AnnotationFile {
  std::vector<ImageInfo> images;
  std::vector<Annotation> annotations;

  friend bool operator==(const AnnotationFile&, const AnnotationFile&) = default;
};

struct PredictionRecord {
  std::int64_t image_id = 0;
  Circle circle;  // pixel units
  double score = 0.0;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

std::string encode_annotations(const AnnotationFile& file);
AnnotationFile decode_annotations(std::string_view text);
std::string encode_predictions(const std::vector<PredictionRecord>& preds);
std::vector<PredictionRecord> decode_predictions(std::string_view text);

/// Ground truth per image; every listed image appears, even without circles.
TruthSet to_truth_set(const AnnotationFile& file);
DetectionSet to_detection_set(const std::vector<PredictionRecord>& preds);

}  // namespace circdet
