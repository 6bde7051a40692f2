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

// Complementary-probability estimator contract and the surrogate
// complementary estimation loss (SCEL).

#include <Eigen/Dense>

#include <concepts>
#include <span>
#include <string>

#include "cll/data.hpp"
#include "cll/error.hpp"
#include "cll/simplex.hpp"

namespace cll {

/// Anything mapping an N x d feature matrix to N complementary-label
/// distributions over K classes.
template <typename E>
concept ProbabilityEstimator = requires(const E& e, const Eigen::MatrixXd& x) {
  { e.predict(x) } -> std::convertible_to<ProbMatrix>;
  { e.k() } -> std::convertible_to<int>;
};

/// (1/N) sum_i -log probs(i, labels[i]), probabilities clamped at 1e-12.
inline double scel(const ProbMatrix& probs, std::span<const int> labels) {
  if (probs.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw Error(ErrorCode::dimension_mismatch, "scel: row count differs from label count");
  }
  if (labels.empty()) throw Error(ErrorCode::empty_input, "scel: empty dataset");
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= probs.cols()) {
      throw Error(ErrorCode::dimension_mismatch, "scel: label outside [0, K)");
    }
    acc -= clamped_log(probs(static_cast<Eigen::Index>(i), y));
  }
  return acc / static_cast<double>(labels.size());
}

template <ProbabilityEstimator E>
double scel_empirical(const E& estimator, const ComplementaryDataset& data) {
  if (estimator.k() != data.k) {
    throw Error(ErrorCode::dimension_mismatch,
                "estimator K=" + std::to_string(estimator.k()) + " but dataset K=" +
                    std::to_string(data.k));
  }
  return scel(estimator.predict(data.features), data.complementary_labels);
}

/// Estimator that returns fixed per-row predictions; row i of the query must
/// be the i-th row it was built for. Handy for exact finite-population work.
class TableEstimator {
 public:
  explicit TableEstimator(ProbMatrix table) : table_(std::move(table)) {}
  int k() const { return static_cast<int>(table_.cols()); }
  ProbMatrix predict(const Eigen::MatrixXd& x) const {
    if (x.rows() != table_.rows()) {
      throw Error(ErrorCode::dimension_mismatch, "TableEstimator: row count differs");
    }
    return table_;
  }
  const ProbMatrix& table() const { return table_; }

 private:
  ProbMatrix table_;
};

}  // namespace cll
