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

// Model-selection metrics, exact finite-population risks and the decoding
// error bounds.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cll/data.hpp"
#include "cll/decode.hpp"
#include "cll/error.hpp"
#include "cll/estimator.hpp"
#include "cll/linalg.hpp"
#include "cll/simplex.hpp"
#include "cll/transition.hpp"

namespace cll {

enum class RiskLoss { kl, l1 };
enum class BoundForm { kl, generic };

struct RiskReport {
  double scel_validation = 0.0;
  std::optional<double> ure_zero_one;
  std::optional<double> empirical_r01;
  std::optional<double> r_kl_exact;
  std::optional<double> bound_value;
};

template <ProbabilityEstimator E>
double scel_validate(const E& estimator, const ComplementaryDataset& validation) {
  return scel_empirical(estimator, validation);
}

inline double empirical_zero_one(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size()) {
    throw Error(ErrorCode::dimension_mismatch, "zero-one: length mismatch");
  }
  if (predictions.empty()) throw Error(ErrorCode::empty_input, "zero-one: no samples");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predictions[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

/// T^{-1} computed by partial-pivot LU; singular T is refused.
inline Eigen::MatrixXd checked_inverse(const TransitionMatrix& t) {
  if (!full_pivot_nonsingular(t.matrix())) {
    throw Error(ErrorCode::singular_transition, "URE needs an invertible transition matrix");
  }
  return LuPartialPivot(t.matrix()).inverse();
}

namespace detail {
/// e_cbar^T T^{-1} l where l_k = [prediction != k].
inline double ure_term(const Eigen::MatrixXd& inv, int cbar, int prediction) {
  return inv.row(cbar).sum() - inv(cbar, prediction);
}
}  // namespace detail

/// Unbiased zero-one risk estimate from complementary labels; may be negative.
inline double ure_zero_one(std::span<const int> predictions,
                           std::span<const int> complementary_labels,
                           const TransitionMatrix& t) {
  if (predictions.size() != complementary_labels.size()) {
    throw Error(ErrorCode::dimension_mismatch, "URE: length mismatch");
  }
  if (predictions.empty()) throw Error(ErrorCode::empty_input, "URE: no samples");
  const Eigen::MatrixXd inv = checked_inverse(t);
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    acc += detail::ure_term(inv, complementary_labels[i], predictions[i]);
  }
  return acc / static_cast<double>(predictions.size());
}

inline double ure_zero_one(std::span<const int> predictions,
                           const ComplementaryDataset& data, const TransitionMatrix& t) {
  return ure_zero_one(predictions, data.complementary_labels, t);
}

/// URE in expectation over the complementary label: each ordinary label y
/// contributes sum_j T(y, j) * term(j). `t_gen` generates the labels, `t`
/// is the matrix the estimator inverts.
inline double ure_zero_one_expected(std::span<const int> predictions,
                                    std::span<const int> ordinary_labels,
                                    const TransitionMatrix& t_gen, const TransitionMatrix& t) {
  if (predictions.size() != ordinary_labels.size()) {
    throw Error(ErrorCode::dimension_mismatch, "URE: length mismatch");
  }
  if (predictions.empty()) throw Error(ErrorCode::empty_input, "URE: no samples");
  const Eigen::MatrixXd inv = checked_inverse(t);
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (int j = 0; j < t.k(); ++j) {
      const double w = t_gen(ordinary_labels[i], j);
      if (w != 0.0) acc += w * detail::ure_term(inv, j, predictions[i]);
    }
  }
  return acc / static_cast<double>(predictions.size());
}

/// Mean over the population of loss(fbar(x_i), T_{y_i}); no sampling.
inline double exact_estimation_risk(const ProbMatrix& probs, std::span<const int> labels,
                                    const TransitionMatrix& t, RiskLoss loss) {
  if (probs.rows() != static_cast<Eigen::Index>(labels.size()) || probs.cols() != t.k()) {
    throw Error(ErrorCode::dimension_mismatch, "risk: shape mismatch");
  }
  if (labels.empty()) throw Error(ErrorCode::empty_input, "risk: empty population");
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto f = probs.row(static_cast<Eigen::Index>(i)).transpose();
    const auto row = t.matrix().row(labels[i]).transpose();
    acc += loss == RiskLoss::kl ? kl_divergence(f, row) : l1_distance(f, row);
  }
  return acc / static_cast<double>(labels.size());
}

template <ProbabilityEstimator E>
double exact_estimation_risk(const E& estimator, const LabeledDataset& population,
                             const TransitionMatrix& t, RiskLoss loss) {
  return exact_estimation_risk(estimator.predict(population.features), population.labels, t,
                               loss);
}

/// SCEL in expectation over complementary labels drawn from T:
/// (1/N) sum_i sum_j T(y_i, j) * -log fbar_j(x_i).
inline double expected_scel(const ProbMatrix& probs, std::span<const int> labels,
                            const TransitionMatrix& t) {
  if (probs.rows() != static_cast<Eigen::Index>(labels.size()) || probs.cols() != t.k()) {
    throw Error(ErrorCode::dimension_mismatch, "expected_scel: shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int j = 0; j < t.k(); ++j) {
      const double w = t(labels[i], j);
      if (w != 0.0) acc -= w * clamped_log(probs(static_cast<Eigen::Index>(i), j));
    }
  }
  return acc / static_cast<double>(labels.size());
}

/// Upper bound on the zero-one error of L1 decoding.
/// generic: (2 / gamma) r + 2 eps / gamma
/// kl:      (4 sqrt 2 / gamma) sqrt r + 2 eps / gamma
inline double zero_one_bound(double r, double gamma, BoundForm form, double epsilon = 0.0) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::degenerate_geometry, "gamma must be positive");
  if (!(r >= 0.0) || !(epsilon >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "risk and epsilon must be non-negative");
  }
  const double main = form == BoundForm::generic
                          ? 2.0 / gamma * r
                          : 4.0 * std::numbers::sqrt2 / gamma * std::sqrt(r);
  return main + 2.0 * epsilon / gamma;
}

/// Index of the smallest metric; ties go to the earliest candidate.
template <typename Config>
const Config& select_model(std::span<const std::pair<Config, double>> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::empty_input, "no candidates to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].second < candidates[best].second) best = i;
  }
  return candidates[best].first;
}

template <typename Config>
const Config& select_model(const std::vector<std::pair<Config, double>>& candidates) {
  return select_model(std::span<const std::pair<Config, double>>(candidates));
}

}  // namespace cll
