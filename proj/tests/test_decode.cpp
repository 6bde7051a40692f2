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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "cll/decode.hpp"

namespace cll {
namespace {

SimplexVector vec(std::initializer_list<double> v) {
  SimplexVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Independent L1 oracle: sorted row distances.
std::vector<double> sorted_l1(const SimplexVector& f, const Eigen::MatrixXd& t) {
  std::vector<double> out;
  for (int y = 0; y < t.rows(); ++y) {
    double d = 0.0;
    for (int j = 0; j < t.cols(); ++j) d += std::fabs(t(y, j) - f(j));
    out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double l1_to_row(const SimplexVector& f, const Eigen::MatrixXd& t, int y) {
  double d = 0.0;
  for (int j = 0; j < t.cols(); ++j) d += std::fabs(t(y, j) - f(j));
  return d;
}

// Rows of biased matrices share entries, so exact L1 ties are common; tests
// comparing decoded indices use inputs whose best two rows differ by > 1e-9.
bool non_degenerate(const SimplexVector& f, const TransitionMatrix& t) {
  const auto d = sorted_l1(f, t.matrix());
  return d[1] - d[0] > 1e-9;
}

TEST(DecodeL1, UniformThreeExample) {
  EXPECT_EQ(decode_l1(vec({0.2, 0.3, 0.5}), uniform_transition(3)), 0);
}

TEST(DecodeL1, ExactRowAndTieBreak) {
  const auto t = uniform_transition(3);
  EXPECT_EQ(decode_l1(t.row(1), t), 1);
  EXPECT_EQ(decode_l1(vec({0.25, 0.25, 0.5}), t), 0);
}

TEST(DecodeL1, DimensionMismatch) {
  EXPECT_THROW(decode_l1(vec({0.5, 0.5}), uniform_transition(3)), Error);
}

TEST(DecodeMax, Examples) {
  const auto t = uniform_transition(3);
  EXPECT_EQ(decode_max(vec({0.2, 0.3, 0.5}), t), 0);
  Rng rng(1);
  const auto weak = biased_transition(10, kWeakBias, rng);
  for (int y = 0; y < 10; ++y) EXPECT_EQ(decode_max(weak.row(y), weak), y);
}

TEST(DecodeMax, SingularTransitionIsRefused) {
  Eigen::MatrixXd m(3, 3);
  m << 0, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0.5, 0;
  try {
    decode_max(vec({0.2, 0.3, 0.5}), TransitionMatrix(m));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular_transition);
  }
}

TEST(DecodeGeneric, L1AgreesWithDecodeL1) {
  Rng rng(2);
  const auto t = mix_uniform_noise(biased_transition(10, kStrongBias, rng), 0.2);
  for (int i = 0; i < 1000; ++i) {
    const auto f = random_simplex(10, rng);
    EXPECT_EQ(decode_generic(f, t, Distance::l1), decode_l1(f, t));
    EXPECT_LE(l1_to_row(f, t.matrix(), decode_l1(f, t)), sorted_l1(f, t.matrix())[0] + 1e-12);
  }
}

TEST(DecodeGeneric, L2AndSelfDistance) {
  const auto t = uniform_transition(3);
  EXPECT_EQ(decode_generic(vec({0.2, 0.3, 0.5}), t, Distance::l2), 0);
  for (Distance d : {Distance::l1, Distance::l2, Distance::kl}) {
    EXPECT_EQ(decode_generic(t.row(2), t, d), 2);
  }
}

TEST(DecodeEquivalence, MaxL1AndArgminAgreeOnUniform) {
  for (int k : {3, 5, 10}) {
    const auto u = uniform_transition(k);
    const MaxDecoder max(u);
    Rng rng(static_cast<std::uint64_t>(k));
    for (int i = 0; i < 10000; ++i) {
      const auto f = random_simplex(k, rng);
      Eigen::Index arg = 0;
      f.minCoeff(&arg);
      ASSERT_EQ(max(f), arg);
      ASSERT_EQ(decode_l1(f, u), arg);
    }
  }
}

TEST(DecodeEquivalence, SoftmaxComplementDecodesToArgmax) {
  for (int k : {3, 5, 10}) {
    const auto u = uniform_transition(k);
    Rng rng(100 + static_cast<std::uint64_t>(k));
    for (int i = 0; i < 2000; ++i) {
      const auto f = random_simplex(k, rng);
      Eigen::Index arg = 0;
      f.maxCoeff(&arg);
      ASSERT_EQ(decode_l1(softmax((1.0 - f.array()).matrix()), u), arg);
    }
  }
}

TEST(DecodeEquivalence, PermutationEquivariance) {
  Rng rng(3);
  const auto t = biased_transition(10, kStrongBias, rng);
  std::vector<int> perm(10);
  std::iota(perm.begin(), perm.end(), 0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd pt(10, 10);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) pt(perm[i], perm[j]) = t(i, j);
    }
    const TransitionMatrix tp(pt);
    const auto f = random_simplex(10, rng);
    if (!non_degenerate(f, t)) continue;
    ++checked;
    SimplexVector fp(10);
    for (int j = 0; j < 10; ++j) fp(perm[j]) = f(j);
    EXPECT_EQ(decode_l1(fp, tp), perm[decode_l1(f, t)]);
    EXPECT_EQ(decode_max(fp, tp), perm[decode_max(f, t)]);
  }
  EXPECT_GT(checked, 100);
}

TEST(DecodeBatch, RowsDecodedIndependently) {
  const auto t = uniform_transition(3);
  ProbMatrix p(3, 3);
  p << 0.2, 0.3, 0.5, 0.5, 0.1, 0.4, 0.4, 0.4, 0.2;
  EXPECT_EQ(decode_batch(p, {DecodeRule::l1, t}), (Labels{0, 1, 2}));
  EXPECT_EQ(decode_batch(p, {DecodeRule::max, t}), (Labels{0, 1, 2}));
  EXPECT_EQ(decode_batch(p, {DecodeRule::generic, t, Distance::kl}).size(), 3u);
}

}  // namespace
}  // namespace cll
