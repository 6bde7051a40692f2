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

// Decoders from complementary probability estimates to ordinary labels.
// Every argmin/argmax breaks ties towards the lowest label index.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "cll/data.hpp"
#include "cll/error.hpp"
#include "cll/linalg.hpp"
#include "cll/simplex.hpp"
#include "cll/transition.hpp"

namespace cll {

enum class Distance { l1, l2, kl };

enum class DecodeRule { l1, max, generic };

inline double decode_distance(const SimplexVector& fbar, const SimplexVector& row, Distance d) {
  switch (d) {
    case Distance::l1: return l1_distance(fbar, row);
    case Distance::l2: return (fbar - row).squaredNorm();
    case Distance::kl: return kl_divergence(fbar, row);
  }
  return 0.0;
}

inline int decode_generic(const SimplexVector& fbar, const TransitionMatrix& t, Distance d) {
  if (fbar.size() != t.k()) {
    throw Error(ErrorCode::dimension_mismatch, "decoder: estimate length differs from K");
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = 0; y < t.k(); ++y) {
    const double v = decode_distance(fbar, t.row(y), d);
    if (v < best_d) {
      best_d = v;
      best = y;
    }
  }
  return best;
}

/// argmin_y ||T_y - fbar||_1.
inline int decode_l1(const SimplexVector& fbar, const TransitionMatrix& t) {
  return decode_generic(fbar, t, Distance::l1);
}

inline int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

/// Solves T^T v = fbar once per query and takes argmax v. Construction fails
/// with singular-transition when T is not invertible.
class MaxDecoder {
 public:
  explicit MaxDecoder(const TransitionMatrix& t)
      : k_(t.k()), lu_(checked_transpose(t)) {}

  int operator()(const SimplexVector& fbar) const {
    if (fbar.size() != k_) {
      throw Error(ErrorCode::dimension_mismatch, "decoder: estimate length differs from K");
    }
    return argmax_lowest(lu_.solve(fbar));
  }

 private:
  static Eigen::MatrixXd checked_transpose(const TransitionMatrix& t) {
    if (!full_pivot_nonsingular(t.matrix())) {
      throw Error(ErrorCode::singular_transition, "Max decoding needs an invertible T");
    }
    return t.matrix().transpose();
  }

  int k_;
  LuPartialPivot lu_;
};

inline int decode_max(const SimplexVector& fbar, const TransitionMatrix& t) {
  return MaxDecoder(t)(fbar);
}

struct DecoderSpec {
  DecodeRule rule = DecodeRule::l1;
  TransitionMatrix transition;
  Distance distance = Distance::l1;  ///< generic rule only
};

/// Decodes every row of `probs`.
inline Labels decode_batch(const ProbMatrix& probs, const DecoderSpec& spec) {
  if (probs.cols() != spec.transition.k()) {
    throw Error(ErrorCode::dimension_mismatch, "decoder: estimate width differs from K");
  }
  Labels out(static_cast<std::size_t>(probs.rows()));
  std::optional<MaxDecoder> max;
  if (spec.rule == DecodeRule::max) max.emplace(spec.transition);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const SimplexVector f = probs.row(i).transpose();
    int y = 0;
    switch (spec.rule) {
      case DecodeRule::l1: y = decode_l1(f, spec.transition); break;
      case DecodeRule::max: y = (*max)(f); break;
      case DecodeRule::generic: y = decode_generic(f, spec.transition, spec.distance); break;
    }
    out[static_cast<std::size_t>(i)] = y;
  }
  return out;
}

}  // namespace cll
