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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "cll/checkpoint.hpp"
#include "cll/estimator.hpp"
#include "cll/model.hpp"
#include "cll/train.hpp"
#include "cll/validate.hpp"

namespace cll {
namespace {

SimplexVector vec(std::initializer_list<double> v) {
  SimplexVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(Kl, IdentityIsZero) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_simplex(6, rng);
    EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-14);
  }
}

TEST(Kl, HandValues) {
  EXPECT_NEAR(kl_divergence(vec({0.5, 0.25, 0.25}), vec({1, 0, 0})), std::log(2.0), 1e-15);
  for (int k : {3, 5, 10}) {
    const SimplexVector u = SimplexVector::Constant(k, 1.0 / k);
    EXPECT_NEAR(kl_divergence(u, SimplexVector::Unit(k, 0)), std::log(k), 1e-12);
  }
}

TEST(Kl, ZeroEstimateIsClamped) {
  const double v = kl_divergence(vec({0.0, 1.0, 0.0}), vec({1, 0, 0}));
  EXPECT_NEAR(v, -std::log(1e-12), 1e-9);
}

TEST(Scel, Examples) {
  ProbMatrix perfect(3, 3);
  perfect << 0, 1, 0, 1, 0, 0, 0, 0, 1;
  const std::vector<int> labels{1, 0, 2};
  EXPECT_EQ(scel(perfect, labels), 0.0);
  EXPECT_NEAR(scel(ProbMatrix::Constant(3, 4, 0.25), std::vector<int>{0, 3, 1}), std::log(4.0),
              1e-15);
  ProbMatrix one(1, 3);
  one << 0.5, 0.25, 0.25;
  EXPECT_NEAR(scel(one, std::vector<int>{0}), 0.6931471805599453, 1e-15);
}

TEST(Scel, EstimatorDimensionMismatch) {
  ComplementaryDataset data;
  data.k = 4;
  data.features = Eigen::MatrixXd::Zero(2, 1);
  data.complementary_labels = {0, 1};
  const TableEstimator est(ProbMatrix::Constant(2, 3, 1.0 / 3));
  try {
    scel_empirical(est, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
}

TEST(HypothesisMode, Examples) {
  const SimplexVector p = vec({0.2, 0.3, 0.5});
  EXPECT_EQ(apply_hypothesis_mode(mode::Identity{}, p), p);
  const auto fixed = apply_hypothesis_mode(mode::FixedTransition{uniform_transition(3)},
                                           SimplexVector::Unit(3, 0));
  EXPECT_TRUE(fixed.isApprox(vec({0, 0.5, 0.5})));
  const SimplexVector u = SimplexVector::Constant(4, 0.25);
  EXPECT_TRUE(apply_hypothesis_mode(mode::SoftmaxComplement{}, u).isApprox(u, 1e-15));
  EXPECT_THROW(apply_hypothesis_mode(mode::FixedTransition{uniform_transition(4)}, p), Error);
}

TEST(HypothesisMode, FixedOutputIsConvexCombinationOfRows) {
  Rng rng(4);
  const auto t = mix_uniform_noise(biased_transition(10, kStrongBias, rng), 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_simplex(10, rng);
    const auto out = apply_hypothesis_mode(mode::FixedTransition{t}, p);
    SimplexVector recon = SimplexVector::Zero(10);
    for (int i = 0; i < 10; ++i) recon += p(i) * t.row(i);
    EXPECT_LE((out - recon).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(is_simplex(out));
  }
}

TEST(HypothesisMode, EveryHeadReturnsSimplexOnRandomInputs) {
  Rng rng(5);
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(5, 5) * 20.0;
  const std::vector<HypothesisMode> heads{mode::Identity{},
                                          mode::FixedTransition{uniform_transition(5)},
                                          mode::TrainableTransition{w}, mode::SoftmaxComplement{}};
  for (const auto& h : heads) {
    for (int trial = 0; trial < 100; ++trial) {
      EXPECT_TRUE(is_simplex(apply_hypothesis_mode(h, random_simplex(5, rng))));
    }
  }
}

TEST(TrainableTransition, Examples) {
  const auto flat = trainable_transition_matrix(Eigen::MatrixXd::Zero(4, 4));
  EXPECT_LE((flat.matrix().array() - 0.25).abs().maxCoeff(), 1e-15);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 0) = 10.0;
  const auto t = trainable_transition_matrix(w);
  const double z = std::exp(10.0) + 2.0;
  EXPECT_NEAR(t(0, 0), std::exp(10.0) / z, 1e-15);
  EXPECT_NEAR(t(0, 1), 1.0 / z, 1e-15);
  EXPECT_NEAR(t(0, 0), 0.99990, 1e-5);

  Eigen::MatrixXd r = Eigen::MatrixXd::Random(6, 6) * 3.0;
  Eigen::MatrixXd shifted = r;
  for (int i = 0; i < 6; ++i) shifted.row(i).array() += 0.7 * (i + 1);
  EXPECT_LE((trainable_transition_matrix(r).matrix() -
             trainable_transition_matrix(shifted).matrix()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE((trainable_transition_matrix(r).matrix().array() > 0.0).all());
}

TEST(InitTrainable, PositiveMatrixIsReproduced) {
  const auto t = mix_uniform_noise(uniform_transition(5), 0.4);
  const auto back = trainable_transition_matrix(init_trainable_transition(t));
  EXPECT_LE((back.matrix() - t.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(InitTrainable, CleanUniformDiagonalStaysTiny) {
  const auto back = trainable_transition_matrix(init_trainable_transition(uniform_transition(10)));
  for (int i = 0; i < 10; ++i) EXPECT_LT(back(i, i), 1e-5);
}

TEST(InitTrainable, StrongRowsWithinTolerance) {
  Rng rng(2);
  const auto t = biased_transition(10, kStrongBias, rng);
  const auto back = trainable_transition_matrix(init_trainable_transition(t, 1e-6));
  for (int i = 0; i < 10; ++i) EXPECT_LT(l1_distance(back.row(i), t.row(i)), 1e-4);
}

Eigen::MatrixXd random_features(Eigen::Index n, Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.5);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  std::uniform_int_distribution<int> u(0, k - 1);
  std::vector<int> y(n);
  for (auto& v : y) v = u(rng);
  return y;
}

TEST(SclIdentity, CpeUniformEqualsSclPlusLogKMinusOne) {
  constexpr int k = 10;
  for (std::uint64_t s = 0; s < 40; ++s) {
    Rng rng(s);
    const BaseSpec base{s % 2 ? BaseKind::mlp : BaseKind::linear, 7};
    Model model(base, 5, k, mode::FixedTransition{uniform_transition(k)}, rng);
    model.parameters() *= 3.0;
    const auto x = random_features(30, 5, rng);
    const auto y = random_labels(30, k, rng);
    const ProbMatrix f = model.base_predict(x);
    double scl = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      scl -= std::log(1.0 - f(static_cast<Eigen::Index>(i), y[i]));
    }
    scl /= static_cast<double>(y.size());
    EXPECT_NEAR(model.loss_and_gradient(x, y, nullptr), scl + std::log(k - 1.0), 1e-9);
  }
}

TEST(ConstantOffset, SurrogateMinusTrueRiskIsRowEntropy) {
  // Exact enumeration of the complementary label weighted by T rows.
  constexpr int k = 3;
  const auto t = uniform_transition(k);
  Rng rng(8);
  const auto y = random_labels(50, k, rng);
  std::vector<double> offsets;
  for (int trial = 0; trial < 10; ++trial) {
    ProbMatrix f(50, k);
    for (int i = 0; i < 50; ++i) f.row(i) = random_simplex(k, rng).transpose();
    double surrogate = 0.0, truth = 0.0;
    for (int i = 0; i < 50; ++i) {
      const SimplexVector fi = f.row(i).transpose();
      for (int j = 0; j < k; ++j) {
        surrogate += t(y[static_cast<std::size_t>(i)], j) *
                     kl_divergence(fi, SimplexVector::Unit(k, j));
      }
      truth += kl_divergence(fi, t.row(y[static_cast<std::size_t>(i)]));
    }
    offsets.push_back((surrogate - truth) / 50.0);
    EXPECT_NEAR(expected_scel(f, y, t) - exact_estimation_risk(f, y, t, RiskLoss::kl),
                offsets.back(), 1e-12);
  }
  const auto [lo, hi] = std::minmax_element(offsets.begin(), offsets.end());
  EXPECT_LT(*hi - *lo, 1e-9);
  EXPECT_NEAR(offsets.front(), std::log(2.0), 1e-12);
}

SplitPair blob_split(int k, int d, int n, double sep, const TransitionMatrix& t, std::uint64_t seed) {
  Rng rng(seed);
  const auto data = make_gaussian_blobs(k, d, n, sep, rng);
  const auto comp = synthesize_complementary(data, t, rng);
  return split_train_validation(comp, 0.1, rng);
}

TEST(Train, SeparableBlobsReachRowEntropy) {
  const auto t = uniform_transition(3);
  const auto split = blob_split(3, 8, 500, 8.0, t, 1);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 30;
  cfg.batch_size = 32;
  const auto est = train({BaseKind::linear}, mode::FixedTransition{t}, split, cfg);
  ASSERT_EQ(est.curves.train_scel.size(), 30u);
  ASSERT_EQ(est.curves.validation_scel.size(), 30u);
  double row_entropy = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (t(i, j) > 0) row_entropy -= t(i, j) * std::log(t(i, j)) / 3.0;
    }
  }
  EXPECT_NEAR(row_entropy, std::log(2.0), 1e-15);
  const double final_scel = scel_empirical(est, split.train);
  EXPECT_LT(std::fabs(final_scel - row_entropy), 0.05) << final_scel;
  EXPECT_LT(est.curves.train_scel.back(), est.curves.train_scel.front());
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  const auto t = uniform_transition(3);
  const auto split = blob_split(3, 4, 50, 2.0, t, 2);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 9;
  auto est = train({BaseKind::mlp, 5}, mode::FixedTransition{t}, split, cfg);
  Rng init(derive_seed(9, 0));
  const Model fresh({BaseKind::mlp, 5}, 4, 3, mode::FixedTransition{t}, init);
  EXPECT_EQ(est.model.parameters(), fresh.parameters());
  EXPECT_TRUE(est.curves.train_scel.empty());
  est.model.parameters().setZero();
  EXPECT_NEAR(scel_empirical(est, split.train), std::log(3.0), 1e-12);
}

TEST(Train, IdenticalSeedsAreBitIdentical) {
  const auto t = uniform_transition(3);
  const auto split = blob_split(3, 4, 80, 3.0, t, 3);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  cfg.seed = 123;
  const HypothesisMode head = mode::TrainableTransition{init_trainable_transition(t)};
  const auto a = train({BaseKind::mlp, 8}, head, split, cfg);
  const auto b = train({BaseKind::mlp, 8}, head, split, cfg);
  EXPECT_EQ(scel_empirical(a, split.train), scel_empirical(b, split.train));
  EXPECT_EQ(a.curves.validation_scel, b.curves.validation_scel);
}

TEST(Train, TrainableTransitionMoves) {
  const auto t = uniform_transition(3);
  const auto split = blob_split(3, 4, 100, 3.0, t, 4);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 1e-2;
  const Eigen::MatrixXd w0 = init_trainable_transition(t);
  const auto est = train({BaseKind::linear}, mode::TrainableTransition{w0}, split, cfg);
  const auto& m = std::get<mode::TrainableTransition>(est.model.mode());
  EXPECT_GT((m.w - w0).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_TRUE(rows_are_simplex(est.model.current_transition()));
}

TEST(Train, ExplodingLearningRateDiverges) {
  const auto t = uniform_transition(3);
  auto split = blob_split(3, 4, 50, 2.0, t, 5);
  split.train.features *= 1e300;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 1e300;
  try {
    train({BaseKind::linear}, mode::Identity{}, split, cfg);
    FAIL();
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.code(), ErrorCode::training_diverged);
    EXPECT_GE(e.last_finite_epoch(), -1);
    EXPECT_LT(e.last_finite_epoch(), 2);
  }
}

TEST(Train, PredictionsAreSimplexForWildInputs) {
  Rng rng(6);
  Model model({BaseKind::mlp, 16}, 6, 4, mode::SoftmaxComplement{}, rng);
  model.parameters() *= 50.0;
  const auto x = random_features(200, 6, rng) * 1e3;
  EXPECT_TRUE(rows_are_simplex(model.predict(x)));
}

TEST(Checkpoint, RoundTripIsExact) {
  Rng rng(7);
  const auto t = mix_uniform_noise(uniform_transition(4), 0.2);
  const std::vector<HypothesisMode> heads{
      mode::Identity{}, mode::FixedTransition{t},
      mode::TrainableTransition{Eigen::MatrixXd::Random(4, 4)}, mode::SoftmaxComplement{}};
  const auto path = std::filesystem::temp_directory_path() / "cll_ckpt.json";
  for (const auto& h : heads) {
    const Model m({BaseKind::mlp, 3}, 5, 4, h, rng);
    save_checkpoint(m, path.string());
    const Model back = load_checkpoint(path.string());
    EXPECT_EQ(back.parameters(), m.parameters());
    EXPECT_EQ(mode_tag(back.mode()), mode_tag(m.mode()));
    const auto x = random_features(10, 5, rng);
    EXPECT_EQ(back.predict(x), m.predict(x));
  }
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsWrongParameterCount) {
  Rng rng(1);
  auto j = checkpoint_to_json(Model({BaseKind::linear}, 2, 3, mode::Identity{}, rng));
  j["parameters"].push_back(1.0);
  try {
    checkpoint_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::format_error);
  }
}

}  // namespace
}  // namespace cll
