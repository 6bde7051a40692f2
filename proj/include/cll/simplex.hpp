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

// Probability-simplex helpers shared by every module.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "cll/error.hpp"

namespace cll {

/// Floor applied to probabilities before taking a log.
inline constexpr double kLogClamp = 1e-12;

/// Tolerance used when checking that a vector sums to one.
inline constexpr double kSimplexTolerance = 1e-9;

/// A length-K probability vector. Rows of batch prediction matrices follow the
/// same contract.
using SimplexVector = Eigen::VectorXd;

/// N x K matrix whose rows are simplex vectors.
using ProbMatrix = Eigen::MatrixXd;

inline double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }

template <typename Derived>
bool is_simplex(const Eigen::MatrixBase<Derived>& p,
                double tol = kSimplexTolerance) {
  if (p.size() == 0) return false;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i)) || p(i) < 0.0) return false;
  }
  return std::abs(p.sum() - 1.0) <= tol;
}

/// Every row of `probs` lies on the simplex.
inline bool rows_are_simplex(const ProbMatrix& probs,
                             double tol = kSimplexTolerance) {
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (!is_simplex(probs.row(i).transpose(), tol)) return false;
  }
  return true;
}

/// Softmax with max-subtraction.
template <typename Derived>
SimplexVector softmax(const Eigen::MatrixBase<Derived>& z) {
  const double m = z.maxCoeff();
  SimplexVector e = (z.derived().array() - m).exp().matrix();
  return e / e.sum();
}

/// Row-wise softmax of an arbitrary matrix, in place.
inline void softmax_rows_inplace(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - m).exp().matrix();
    z.row(i) /= z.row(i).sum();
  }
}

/// KL(target || estimate) = sum_k target_k (log target_k - log estimate_k),
/// with 0 log 0 = 0 on the target side and the estimate clamped to 1e-12.
template <typename A, typename B>
double kl_divergence(const Eigen::MatrixBase<A>& estimate,
                     const Eigen::MatrixBase<B>& target) {
  if (estimate.size() != target.size()) {
    throw Error(ErrorCode::dimension_mismatch, "kl_divergence: length mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index k = 0; k < target.size(); ++k) {
    const double t = target(k);
    if (t <= 0.0) continue;
    acc += t * (std::log(t) - clamped_log(estimate(k)));
  }
  return std::max(acc, 0.0);
}

template <typename A, typename B>
double l1_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a.derived().array() - b.derived().array()).abs().sum();
}

/// Mixes (base, stream) into an independent 64-bit seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

/// Uniformly random point of the simplex (normalized exponentials).
inline SimplexVector random_simplex(int k, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  SimplexVector p(k);
  for (int i = 0; i < k; ++i) p(i) = expo(rng);
  return p / p.sum();
}

}  // namespace cll
