// Copyright 2026 The cll Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cll {

enum class ErrorCode {
  invalid_class_count,
  invalid_probabilities,
  invalid_noise_level,
  invalid_fraction,
  invalid_argument,
  dimension_mismatch,
  format_error,
  not_fitted,
  training_diverged,
  singular_transition,
  degenerate_geometry,
  config_error,
  io_error,
  empty_input,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_class_count: return "invalid-class-count";
    case ErrorCode::invalid_probabilities: return "invalid-probabilities";
    case ErrorCode::invalid_noise_level: return "invalid-noise-level";
    case ErrorCode::invalid_fraction: return "invalid-fraction";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::format_error: return "format-error";
    case ErrorCode::not_fitted: return "not-fitted";
    case ErrorCode::training_diverged: return "training-diverged";
    case ErrorCode::singular_transition: return "singular-transition";
    case ErrorCode::degenerate_geometry: return "degenerate-geometry";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::empty_input: return "empty-input";
  }
  return "unknown";
}

/// Exception carrying a machine-checkable error code. what() is
/// "<code>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the trainer when the loss stops being finite.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(int last_finite_epoch, const std::string& message)
      : Error(ErrorCode::training_diverged, message),
        last_finite_epoch_(last_finite_epoch) {}

  /// Index of the last epoch that finished with a finite loss, -1 if none.
  int last_finite_epoch() const noexcept { return last_finite_epoch_; }

 private:
  int last_finite_epoch_;
};

/// Raised by the IDX reader; offset is the byte position of the problem.
class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& message)
      : Error(ErrorCode::format_error,
              message + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace cll
