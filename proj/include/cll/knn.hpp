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

// k-nearest-neighbour complementary probability estimates in PCA space.
// f_j(x) = (#{neighbours with complementary label j} + alpha) / (k + K alpha).

#include <Eigen/Dense>

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cll/data.hpp"
#include "cll/error.hpp"
#include "cll/pca.hpp"
#include "cll/simplex.hpp"

namespace cll {

inline constexpr int kDefaultPcaDims = 32;

class KnnEstimator {
 public:
  KnnEstimator() = default;

  /// Projects the training features onto min(pca_dims, N, d) components.
  KnnEstimator(const ComplementaryDataset& train, int neighbors, double alpha = 1.0,
               int pca_dims = kDefaultPcaDims)
      : classes_(train.k), neighbors_(neighbors), alpha_(alpha) {
    if (neighbors < 1) throw Error(ErrorCode::invalid_argument, "need at least one neighbour");
    if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be positive");
    if (train.size() == 0) throw Error(ErrorCode::empty_input, "empty training set");
    const Eigen::Index dims =
        std::min<Eigen::Index>({pca_dims, train.size(), train.dim()});
    pca_ = pca_fit(train.features, dims);
    points_ = pca_project(pca_, train.features).transpose();
    labels_ = train.complementary_labels;
  }

  int k() const { return classes_; }
  int neighbors() const { return neighbors_; }
  double alpha() const { return alpha_; }
  bool fitted() const { return points_.cols() > 0; }
  const PcaProjection& projection() const { return pca_; }

  KnnEstimator with_neighbors(int neighbors) const {
    if (neighbors < 1) throw Error(ErrorCode::invalid_argument, "need at least one neighbour");
    KnnEstimator copy = *this;
    copy.neighbors_ = neighbors;
    return copy;
  }

  ProbMatrix predict(const Eigen::MatrixXd& x) const {
    const int nb[] = {neighbors_};
    return std::move(predict_many(x, nb).front());
  }

  /// One prediction matrix per entry of `neighbor_counts`, sharing the
  /// distance computation.
  std::vector<ProbMatrix> predict_many(const Eigen::MatrixXd& x,
                                       std::span<const int> neighbor_counts) const {
    if (!fitted()) throw Error(ErrorCode::not_fitted, "k-NN index is empty");
    const Eigen::MatrixXd q = pca_project(pca_, x).transpose();
    const Eigen::Index n_train = points_.cols();
    int max_k = 0;
    for (int c : neighbor_counts) {
      if (c < 1) throw Error(ErrorCode::invalid_argument, "need at least one neighbour");
      max_k = std::max(max_k, c);
    }
    const Eigen::Index take = std::min<Eigen::Index>(max_k, n_train);

    std::vector<ProbMatrix> out(neighbor_counts.size(), ProbMatrix(x.rows(), classes_));
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n_train));
    Eigen::VectorXd counts(classes_);
    for (Eigen::Index i = 0; i < q.cols(); ++i) {
      for (Eigen::Index j = 0; j < n_train; ++j) {
        dist[static_cast<std::size_t>(j)] = {(points_.col(j) - q.col(i)).squaredNorm(), j};
      }
      std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
      for (std::size_t g = 0; g < neighbor_counts.size(); ++g) {
        const Eigen::Index kk = std::min<Eigen::Index>(neighbor_counts[g], n_train);
        counts.setZero();
        for (Eigen::Index r = 0; r < kk; ++r) {
          counts(labels_[static_cast<std::size_t>(dist[static_cast<std::size_t>(r)].second)]) += 1.0;
        }
        out[g].row(i) = ((counts.array() + alpha_) /
                         (static_cast<double>(kk) + classes_ * alpha_)).matrix().transpose();
      }
    }
    return out;
  }

 private:
  int classes_ = 0;
  int neighbors_ = 1;
  double alpha_ = 1.0;
  PcaProjection pca_;
  Eigen::MatrixXd points_;  ///< dims x N
  Labels labels_;
};

}  // namespace cll
