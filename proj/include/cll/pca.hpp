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

// Principal component projection.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "cll/error.hpp"

namespace cll {

struct PcaProjection {
  Eigen::VectorXd mean;           ///< d
  Eigen::MatrixXd components;     ///< d x dims, orthonormal columns
  Eigen::VectorXd explained;      ///< eigenvalues, descending

  Eigen::Index dims() const { return components.cols(); }
};

/// Top-`dims` eigenvectors of the centred sample covariance. Each component is
/// signed so that its largest-magnitude coordinate is positive.
inline PcaProjection pca_fit(const Eigen::MatrixXd& features, Eigen::Index dims) {
  const Eigen::Index n = features.rows(), d = features.cols();
  if (dims < 1 || dims > std::min(n, d)) {
    throw Error(ErrorCode::invalid_argument,
                "pca dims " + std::to_string(dims) + " must lie in [1, min(N, d)]");
  }
  PcaProjection p;
  p.mean = features.colwise().mean().transpose();
  const Eigen::MatrixXd centred = features.rowwise() - p.mean.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd cov = (centred.transpose() * centred) / denom;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::invalid_argument, "covariance eigendecomposition failed");
  }
  p.components.resize(d, dims);
  p.explained.resize(dims);
  for (Eigen::Index c = 0; c < dims; ++c) {
    const Eigen::Index src = d - 1 - c;  // eigenvalues come out ascending
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    p.components.col(c) = v;
    p.explained(c) = eig.eigenvalues()(src);
  }
  return p;
}

inline Eigen::MatrixXd pca_project(const PcaProjection& p, const Eigen::MatrixXd& features) {
  if (features.cols() != p.mean.size()) {
    throw Error(ErrorCode::dimension_mismatch, "pca_project: feature dimension differs");
  }
  return (features.rowwise() - p.mean.transpose()) * p.components;
}

}  // namespace cll
