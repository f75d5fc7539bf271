// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#include "circdet/formats.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <json.hpp>
#include <sstream>

#include "circdet/errors.hpp"

namespace circdet {
namespace {

constexpr char kGridMagic[4] = {'F', 'G', 'R', 'D'};
constexpr char kContainerMagic[4] = {'F', 'G', 'R', 'C'};

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

// Cursor over a byte buffer that reports absolute offsets on failure.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(std::string("truncated input: expected ") + what, pos_);
    }
  }

  void magic(const char (&expected)[4], const char* what) {
    need(4, what);
    if (std::memcmp(bytes_.data() + pos_, expected, 4) != 0) {
      throw FormatError(std::string("bad magic for ") + what, pos_);
    }
    pos_ += 4;
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  FeatureGrid grid() {
    magic(kGridMagic, "FGRID magic");
    const std::uint32_t h = u32("height");
    const std::uint32_t w = u32("width");
    const std::uint32_t d = u32("depth");
    const std::uint64_t count = static_cast<std::uint64_t>(h) * w * d;
    if (count > remaining() / 4) {
      // Points at the first float that cannot be read completely.
      throw FormatError("truncated FGRID payload: expected " + std::to_string(count) + " floats",
                        pos_ + 4 * (remaining() / 4));
    }
    FeatureGrid g;
    g.height = static_cast<int>(h);
    g.width = static_cast<int>(w);
    g.depth = static_cast<int>(d);
    g.data.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes_[pos_ + b]) << (8 * b);
      g.data[i] = std::bit_cast<float>(bits);
      pos_ += 4;
    }
    return g;
  }

  void finish() const {
    if (remaining() != 0) throw FormatError("unexpected trailing bytes", pos_);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void append_grid(Bytes& out, const FeatureGrid& t) {
  if (t.height < 0 || t.width < 0 || t.depth < 0 ||
      t.data.size() != static_cast<std::size_t>(t.height) * t.width * t.depth) {
    throw ShapeError("encode_fgrid: buffer does not match shape");
  }
  out.insert(out.end(), std::begin(kGridMagic), std::end(kGridMagic));
  put_u32(out, static_cast<std::uint32_t>(t.height));
  put_u32(out, static_cast<std::uint32_t>(t.width));
  put_u32(out, static_cast<std::uint32_t>(t.depth));
  for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

// 9 significant digits, widened to 17 when that would not parse back to
// the same double.
std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what(),
                      e.byte > 0 ? e.byte - 1 : 0);
  }
}

template <typename Fn>
auto with_schema_errors(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

Circle read_circle(const nlohmann::json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("r").get<double>()};
}

}  // namespace

Bytes encode_fgrid(const FeatureGrid& t) {
  Bytes out;
  out.reserve(16 + 4 * t.data.size());
  append_grid(out, t);
  return out;
}

FeatureGrid decode_fgrid(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  FeatureGrid g = r.grid();
  r.finish();
  return g;
}

Bytes encode_fgrc(const NamedTensors& tensors) {
  Bytes out(std::begin(kContainerMagic), std::end(kContainerMagic));
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ShapeError("encode_fgrc: tensor name too long");
    }
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    append_grid(out, t);
  }
  return out;
}

NamedTensors decode_fgrc(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.magic(kContainerMagic, "FGRC magic");
  const std::uint32_t count = r.u32("tensor count");
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16("name length");
    std::string name = r.text(len, "tensor name");
    out.emplace_back(std::move(name), r.grid());
  }
  r.finish();
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const Bytes& contents) {
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(contents.data()),
                                           contents.size()));
}

void save_fgrid(const std::filesystem::path& path, const FeatureGrid& t) {
  write_file_atomic(path, encode_fgrid(t));
}

FeatureGrid load_fgrid(const std::filesystem::path& path) { return decode_fgrid(read_file(path)); }

void save_fgrc(const std::filesystem::path& path, const NamedTensors& tensors) {
  write_file_atomic(path, encode_fgrc(tensors));
}

NamedTensors load_fgrc(const std::filesystem::path& path) { return decode_fgrc(read_file(path)); }

std::string encode_annotations(const AnnotationFile& file) {
  std::ostringstream out;
  out << "{\n  \"images\": [";
  for (std::size_t i = 0; i < file.images.size(); ++i) {
    const auto& im = file.images[i];
    out << (i ? ",\n" : "\n") << "    {\"id\": " << im.id << ", \"h\": " << im.height
        << ", \"w\": " << im.width << "}";
  }
  out << (file.images.empty() ? "" : "\n  ") << "],\n  \"annotations\": [";
  for (std::size_t i = 0; i < file.annotations.size(); ++i) {
    const auto& a = file.annotations[i];
    out << (i ? ",\n" : "\n") << "    {\"image_id\": " << a.image_id
        << ", \"x\": " << format_number(a.circle.x) << ", \"y\": " << format_number(a.circle.y)
        << ", \"r\": " << format_number(a.circle.r) << "}";
  }
  out << (file.annotations.empty() ? "" : "\n  ") << "]\n}\n";
  return out.str();
}

AnnotationFile decode_annotations(std::string_view text) {
  const auto j = parse_json(text);
  return with_schema_errors("annotation file", [&] {
    AnnotationFile f;
    for (const auto& im : j.at("images")) {
      f.images.push_back({im.at("id").get<std::int64_t>(), im.at("h").get<int>(),
                          im.at("w").get<int>()});
    }
    for (const auto& a : j.at("annotations")) {
      f.annotations.push_back({a.at("image_id").get<std::int64_t>(), read_circle(a)});
    }
    return f;
  });
}

std::string encode_predictions(const std::vector<PredictionRecord>& preds) {
  std::ostringstream out;
  out << "{\n  \"predictions\": [";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    out << (i ? ",\n" : "\n") << "    {\"image_id\": " << p.image_id
        << ", \"x\": " << format_number(p.circle.x) << ", \"y\": " << format_number(p.circle.y)
        << ", \"r\": " << format_number(p.circle.r) << ", \"score\": " << format_number(p.score)
        << "}";
  }
  out << (preds.empty() ? "" : "\n  ") << "]\n}\n";
  return out.str();
}

std::vector<PredictionRecord> decode_predictions(std::string_view text) {
  const auto j = parse_json(text);
  return with_schema_errors("prediction file", [&] {
    std::vector<PredictionRecord> out;
    for (const auto& p : j.at("predictions")) {
      out.push_back({p.at("image_id").get<std::int64_t>(), read_circle(p),
                     p.at("score").get<double>()});
    }
    return out;
  });
}

TruthSet to_truth_set(const AnnotationFile& file) {
  TruthSet out;
  for (const auto& im : file.images) out[im.id];
  for (const auto& a : file.annotations) {
    if (!out.contains(a.image_id)) {
      throw MissingImage("annotation refers to unlisted image " + std::to_string(a.image_id));
    }
    out[a.image_id].push_back(a.circle);
  }
  return out;
}

DetectionSet to_detection_set(const std::vector<PredictionRecord>& preds) {
  DetectionSet out;
  for (const auto& p : preds) out[p.image_id].push_back({p.circle, p.score});
  return out;
}

}  // namespace circdet
