// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace circdet {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidCircle : public Error {
 public:
  using Error::Error;
};

/// Raised by analytic gradients at tangency / internal-tangency configurations.
class NonDifferentiablePoint : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NonFiniteCost : public Error {
 public:
  using Error::Error;
};

class EmptyPredictions : public Error {
 public:
  using Error::Error;
};

class InvalidAssignment : public Error {
 public:
  using Error::Error;
};

class NonNormalizedAttention : public Error {
 public:
  using Error::Error;
};

class EmptyRegion : public Error {
 public:
  using Error::Error;
};

class MissingImage : public Error {
 public:
  using Error::Error;
};

class InfeasibleConfig : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class NonFiniteFunction : public Error {
 public:
  using Error::Error;
};

class DivergedLoss : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `offset()` is the byte position of the first
/// element that could not be decoded, when it is known.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what,
                       std::optional<std::uint64_t> offset = std::nullopt)
      : Error(offset ? what + " (at byte " + std::to_string(*offset) + ")"
                     : what),
        offset_(offset) {}

  std::optional<std::uint64_t> offset() const noexcept { return offset_; }

 private:
  std::optional<std::uint64_t> offset_;
};

}  // namespace circdet
