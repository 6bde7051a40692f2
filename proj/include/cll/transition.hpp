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

// Transition matrices T with T(i, j) = P(complementary = j | ordinary = i).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cll/error.hpp"
#include "cll/linalg.hpp"
#include "cll/simplex.hpp"

namespace cll {

inline constexpr double kRowSumTolerance = 1e-9;

/// Row-stochastic K x K matrix, K > 2. Immutable once built.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
    if (rows_.rows() != rows_.cols()) {
      throw Error(ErrorCode::dimension_mismatch, "transition matrix must be square");
    }
    if (rows_.rows() <= 2) {
      throw Error(ErrorCode::invalid_class_count,
                  "need K > 2, got " + std::to_string(rows_.rows()));
    }
    for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
      for (Eigen::Index j = 0; j < rows_.cols(); ++j) {
        const double v = rows_(i, j);
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
          throw Error(ErrorCode::invalid_probabilities,
                      "entry (" + std::to_string(i) + "," + std::to_string(j) +
                          ") outside [0,1]");
        }
      }
      const double s = rows_.row(i).sum();
      if (std::abs(s - 1.0) > kRowSumTolerance) {
        std::ostringstream msg;
        msg << std::setprecision(17) << "row " << i << " sums to " << s;
        throw Error(ErrorCode::invalid_probabilities, msg.str());
      }
    }
    clean_ = (rows_.diagonal().array() == 0.0).all();
  }

  int k() const { return static_cast<int>(rows_.rows()); }
  const Eigen::MatrixXd& matrix() const { return rows_; }
  double operator()(int i, int j) const { return rows_(i, j); }
  /// Row `label` as a column vector.
  SimplexVector row(int label) const { return rows_.row(label).transpose(); }

  /// Zero diagonal: an ordinary label is never its own complementary label.
  bool clean() const { return clean_; }

  friend bool operator==(const TransitionMatrix& a, const TransitionMatrix& b) {
    return a.rows_ == b.rows_;
  }

 private:
  Eigen::MatrixXd rows_;
  bool clean_ = false;
};

struct MatrixGeometry {
  double gamma_l1 = 0.0;  ///< min over i != j of ||T_i - T_j||_1
  bool invertible = false;
  double condition_hint = std::numeric_limits<double>::infinity();
  bool degenerate() const { return gamma_l1 == 0.0; }
};

/// Probability triple for the three complementary subsets of a biased matrix.
struct BiasTriple {
  double p1, p2, p3;
};

inline constexpr BiasTriple kStrongBias{0.75 / 3, 0.24 / 3, 0.01 / 3};
inline constexpr BiasTriple kWeakBias{0.45 / 3, 0.30 / 3, 0.25 / 3};

inline TransitionMatrix uniform_transition(int k) {
  if (k <= 2) {
    throw Error(ErrorCode::invalid_class_count, "need K > 2, got " + std::to_string(k));
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, k, 1.0 / (k - 1));
  m.diagonal().setZero();
  return TransitionMatrix(std::move(m));
}

/// For every ordinary class, the K-1 other classes are shuffled and cut into
/// three equal subsets carrying p1, p2 and p3.
inline TransitionMatrix biased_transition(int k, BiasTriple p, Rng& rng) {
  if (k <= 2 || (k - 1) % 3 != 0) {
    throw Error(ErrorCode::invalid_class_count,
                "biased transition needs K > 2 with (K-1) divisible by 3, got " +
                    std::to_string(k));
  }
  const int subset = (k - 1) / 3;
  const double total = subset * (p.p1 + p.p2 + p.p3);
  if (std::abs(total - 1.0) > kRowSumTolerance || p.p1 < 0 || p.p2 < 0 || p.p3 < 0) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "rows would sum to " << total;
    throw Error(ErrorCode::invalid_probabilities, msg.str());
  }
  const std::array<double, 3> probs{p.p1, p.p2, p.p3};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  std::vector<int> others;
  for (int y = 0; y < k; ++y) {
    others.clear();
    for (int j = 0; j < k; ++j) {
      if (j != y) others.push_back(j);
    }
    std::shuffle(others.begin(), others.end(), rng);
    for (int idx = 0; idx < k - 1; ++idx) {
      m(y, others[static_cast<std::size_t>(idx)]) = probs[static_cast<std::size_t>(idx / subset)];
    }
  }
  return TransitionMatrix(std::move(m));
}

/// (1 - lambda) T + lambda / K. lambda == 0 returns T unchanged.
inline TransitionMatrix mix_uniform_noise(const TransitionMatrix& t, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::invalid_noise_level, "lambda must lie in [0, 1]");
  }
  if (lambda == 0.0) return t;
  const int k = t.k();
  Eigen::MatrixXd m = (1.0 - lambda) * t.matrix() +
                      Eigen::MatrixXd::Constant(k, k, lambda / k);
  return TransitionMatrix(std::move(m));
}

inline MatrixGeometry geometry(const TransitionMatrix& t) {
  MatrixGeometry g;
  const int k = t.k();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      best = std::min(best, l1_distance(t.matrix().row(i), t.matrix().row(j)));
    }
  }
  g.gamma_l1 = best;
  g.invertible = full_pivot_nonsingular(t.matrix());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t.matrix());
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  g.condition_hint = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  return g;
}

/// epsilon = max over rows of ||T'_k - T_k||_1.
inline double perturbation_radius(const TransitionMatrix& t_true,
                                  const TransitionMatrix& t_given) {
  if (t_true.k() != t_given.k()) {
    throw Error(ErrorCode::dimension_mismatch, "perturbation_radius: K differs");
  }
  double eps = 0.0;
  for (int i = 0; i < t_true.k(); ++i) {
    eps = std::max(eps, l1_distance(t_true.matrix().row(i), t_given.matrix().row(i)));
  }
  return eps;
}

/// Plain text: a line with K, then K lines of K space-separated decimals.
inline void write_transition(std::ostream& out, const TransitionMatrix& t) {
  out << t.k() << '\n' << std::setprecision(17);
  for (int i = 0; i < t.k(); ++i) {
    for (int j = 0; j < t.k(); ++j) {
      if (j) out << ' ';
      out << t(i, j);
    }
    out << '\n';
  }
}

inline TransitionMatrix read_transition(std::istream& in) {
  long long k = 0;
  if (!(in >> k) || k <= 0 || k > 100000) {
    throw Error(ErrorCode::format_error, "transition file: bad class count header");
  }
  Eigen::MatrixXd m(k, k);
  for (long long i = 0; i < k; ++i) {
    for (long long j = 0; j < k; ++j) {
      if (!(in >> m(i, j))) {
        throw Error(ErrorCode::format_error,
                    "transition file: missing entry (" + std::to_string(i) + "," +
                        std::to_string(j) + ")");
      }
    }
  }
  return TransitionMatrix(std::move(m));
}

}  // namespace cll
