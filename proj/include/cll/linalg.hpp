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

// Small dense solvers. Tolerances are absolute pivot magnitudes.

#include <Eigen/Dense>

#include <cmath>
#include <utility>
#include <vector>

#include "cll/error.hpp"

namespace cll {

inline constexpr double kPivotTolerance = 1e-10;

/// Gaussian elimination with full pivoting; false as soon as the largest
/// remaining pivot falls below `tol`.
inline bool full_pivot_nonsingular(Eigen::MatrixXd a, double tol = kPivotTolerance) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) return false;
  for (Eigen::Index step = 0; step < n; ++step) {
    Eigen::Index pr = step, pc = step;
    double best = -1.0;
    for (Eigen::Index i = step; i < n; ++i) {
      for (Eigen::Index j = step; j < n; ++j) {
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          pr = i;
          pc = j;
        }
      }
    }
    if (best < tol) return false;
    a.row(step).swap(a.row(pr));
    a.col(step).swap(a.col(pc));
    for (Eigen::Index i = step + 1; i < n; ++i) {
      const double f = a(i, step) / a(step, step);
      a.row(i).tail(n - step) -= f * a.row(step).tail(n - step);
    }
  }
  return true;
}

/// LU factorization with partial (row) pivoting, P A = L U.
class LuPartialPivot {
 public:
  explicit LuPartialPivot(const Eigen::MatrixXd& a, double tol = kPivotTolerance)
      : lu_(a), perm_(static_cast<std::size_t>(a.rows())) {
    const Eigen::Index n = a.rows();
    if (n != a.cols()) {
      throw Error(ErrorCode::dimension_mismatch, "LU of a non-square matrix");
    }
    for (Eigen::Index i = 0; i < n; ++i) perm_[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index p = k;
      for (Eigen::Index i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
      }
      if (std::abs(lu_(p, k)) < tol) {
        throw Error(ErrorCode::singular_transition,
                    "pivot below " + std::to_string(tol) + " in column " +
                        std::to_string(k));
      }
      if (p != k) {
        lu_.row(k).swap(lu_.row(p));
        std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(p)]);
      }
      for (Eigen::Index i = k + 1; i < n; ++i) {
        lu_(i, k) /= lu_(k, k);
        lu_.row(i).tail(n - k - 1) -= lu_(i, k) * lu_.row(k).tail(n - k - 1);
      }
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const Eigen::Index n = lu_.rows();
    if (b.size() != n) throw Error(ErrorCode::dimension_mismatch, "LU solve: rhs length");
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = b(perm_[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < i; ++j) s -= lu_(i, j) * y(j);
      y(i) = s;
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      double s = y(i);
      for (Eigen::Index j = i + 1; j < n; ++j) s -= lu_(i, j) * x(j);
      x(i) = s / lu_(i, i);
    }
    return x;
  }

  Eigen::MatrixXd inverse() const {
    const Eigen::Index n = lu_.rows();
    Eigen::MatrixXd inv(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      inv.col(j) = solve(Eigen::VectorXd::Unit(n, j));
    }
    return inv;
  }

 private:
  Eigen::MatrixXd lu_;
  std::vector<Eigen::Index> perm_;
};

}  // namespace cll
