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
#include <cmath>
#include <vector>

#include "cll/knn.hpp"
#include "cll/pca.hpp"

namespace cll {
namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

TEST(Pca, RecoversTwoDimensionalSubspace) {
  Rng rng(1);
  const Eigen::MatrixXd coeffs = gaussian(200, 2, rng);
  Eigen::MatrixXd basis = gaussian(2, 6, rng);
  const Eigen::MatrixXd x = (coeffs * basis).rowwise() + Eigen::RowVectorXd::LinSpaced(6, -1, 4);
  const auto p = pca_fit(x, 2);
  const Eigen::MatrixXd z = pca_project(p, x);
  const Eigen::MatrixXd recon = (z * p.components.transpose()).rowwise() + p.mean.transpose();
  EXPECT_LT((recon - x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pca, FullRankPreservesTotalVariance) {
  Rng rng(2);
  const Eigen::MatrixXd x = gaussian(500, 5, rng);
  const auto p = pca_fit(x, 5);
  const Eigen::MatrixXd z = pca_project(p, x);
  auto total_variance = [](const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd c = m.rowwise() - m.colwise().mean();
    return c.squaredNorm() / static_cast<double>(m.rows() - 1);
  };
  EXPECT_NEAR(total_variance(z) / total_variance(x), 1.0, 1e-6);
  EXPECT_NEAR(p.explained.sum(), total_variance(x), 1e-9);
  for (Eigen::Index c = 1; c < p.dims(); ++c) EXPECT_GE(p.explained(c - 1), p.explained(c));
}

TEST(Pca, MeanProjectsToZeroAndSignsAreCanonical) {
  Rng rng(3);
  const Eigen::MatrixXd x = gaussian(100, 4, rng) * 3.0;
  const auto p = pca_fit(x, 3);
  EXPECT_LT(pca_project(p, p.mean.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index c = 0; c < p.dims(); ++c) {
    Eigen::Index arg = 0;
    p.components.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(p.components(arg, c), 0.0);
  }
}

TEST(Pca, RejectsTooManyDims) {
  Rng rng(4);
  try {
    pca_fit(gaussian(3, 5, rng), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

ComplementaryDataset labelled_points(const Eigen::MatrixXd& x, std::vector<int> labels, int k) {
  ComplementaryDataset d;
  d.features = x;
  d.complementary_labels = std::move(labels);
  d.k = k;
  return d;
}

TEST(Knn, SharedLabelGivesSmoothedPeak) {
  Rng rng(5);
  const Eigen::MatrixXd x = gaussian(30, 3, rng);
  const KnnEstimator knn(labelled_points(x, std::vector<int>(30, 1), 3), 10, 1.0);
  const ProbMatrix p = knn.predict(x.topRows(1));
  EXPECT_NEAR(p(0, 0), 1.0 / 13, 1e-15);
  EXPECT_NEAR(p(0, 1), 11.0 / 13, 1e-15);
  EXPECT_NEAR(p(0, 2), 1.0 / 13, 1e-15);
}

TEST(Knn, SingleNeighbourOnTrainingPoint) {
  Rng rng(6);
  const Eigen::MatrixXd x = gaussian(20, 4, rng);
  std::vector<int> labels(20);
  for (int i = 0; i < 20; ++i) labels[static_cast<std::size_t>(i)] = i % 3;
  const double alpha = 0.5;
  const KnnEstimator knn(labelled_points(x, labels, 3), 1, alpha);
  const ProbMatrix p = knn.predict(x.row(7));
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(p(0, j), ((labels[7] == j ? 1.0 : 0.0) + alpha) / (1.0 + 3 * alpha), 1e-15);
  }
}

TEST(Knn, LargeAlphaTendsToUniform) {
  Rng rng(7);
  const Eigen::MatrixXd x = gaussian(20, 3, rng);
  const KnnEstimator knn(labelled_points(x, std::vector<int>(20, 0), 4), 5, 1e9);
  const ProbMatrix p = knn.predict(gaussian(5, 3, rng));
  EXPECT_LT((p.array() - 0.25).abs().maxCoeff(), 1e-8);
}

TEST(Knn, MatchesBruteForceCounting) {
  Rng rng(8);
  const Eigen::MatrixXd x = gaussian(120, 40, rng);
  std::vector<int> labels(120);
  std::uniform_int_distribution<int> lab(0, 4);
  for (auto& v : labels) v = lab(rng);
  const KnnEstimator knn(labelled_points(x, labels, 5), 7, 1.0, 32);
  EXPECT_EQ(knn.projection().dims(), 32);
  const Eigen::MatrixXd q = gaussian(10, 40, rng);
  const ProbMatrix p = knn.predict(q);
  const Eigen::MatrixXd zt = pca_project(knn.projection(), x);
  const Eigen::MatrixXd zq = pca_project(knn.projection(), q);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<std::pair<double, int>> dist;
    for (Eigen::Index j = 0; j < zt.rows(); ++j) {
      dist.emplace_back((zt.row(j) - zq.row(i)).squaredNorm(), static_cast<int>(j));
    }
    std::sort(dist.begin(), dist.end());
    std::vector<double> counts(5, 0.0);
    for (int r = 0; r < 7; ++r) counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(r)].second)])] += 1;
    for (int j = 0; j < 5; ++j) {
      EXPECT_NEAR(p(i, j), (counts[static_cast<std::size_t>(j)] + 1.0) / 12.0, 1e-15);
    }
  }
  const std::vector<int> grid{1, 7, 50};
  const auto many = knn.predict_many(q, grid);
  EXPECT_EQ(many[1], p);
  EXPECT_TRUE(rows_are_simplex(many[0]) && rows_are_simplex(many[2]));
}

TEST(Knn, UnfittedIndexThrows) {
  const KnnEstimator knn;
  try {
    knn.predict(Eigen::MatrixXd::Zero(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_fitted);
  }
}

}  // namespace
}  // namespace cll
