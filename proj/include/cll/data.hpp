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

// Ordinary- and complementary-labelled datasets. Labels are 0-based class
// indices in [0, K).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cll/error.hpp"
#include "cll/simplex.hpp"
#include "cll/transition.hpp"

namespace cll {

using Labels = std::vector<int>;

struct LabeledDataset {
  Eigen::MatrixXd features;  ///< N x d, one sample per row
  Labels labels;
  int k = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

struct ComplementaryDataset {
  Eigen::MatrixXd features;
  Labels complementary_labels;
  /// Ordinary labels kept for evaluation only; training never reads them.
  std::optional<Labels> hidden_ordinary;
  int k = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

struct SplitPair {
  ComplementaryDataset train;
  ComplementaryDataset validation;
  std::vector<Eigen::Index> train_indices;
  std::vector<Eigen::Index> validation_indices;
};

inline void check_labels(const Labels& labels, int k, Eigen::Index n, const char* what) {
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": label count differs from feature rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= k) {
      throw Error(ErrorCode::invalid_argument,
                  std::string(what) + ": label " + std::to_string(y) + " outside [0, K)");
    }
  }
}

/// Draws each complementary label from the transition row of its ordinary label.
inline ComplementaryDataset synthesize_complementary(const LabeledDataset& data,
                                                     const TransitionMatrix& t,
                                                     Rng& rng) {
  if (data.k != t.k()) {
    throw Error(ErrorCode::dimension_mismatch,
                "dataset has K=" + std::to_string(data.k) + ", transition has K=" +
                    std::to_string(t.k()));
  }
  check_labels(data.labels, data.k, data.size(), "synthesize_complementary");
  std::vector<std::discrete_distribution<int>> rows;
  rows.reserve(static_cast<std::size_t>(t.k()));
  for (int i = 0; i < t.k(); ++i) {
    std::vector<double> w(static_cast<std::size_t>(t.k()));
    for (int j = 0; j < t.k(); ++j) w[static_cast<std::size_t>(j)] = t(i, j);
    rows.emplace_back(w.begin(), w.end());
  }
  ComplementaryDataset out;
  out.features = data.features;
  out.k = data.k;
  out.hidden_ordinary = data.labels;
  out.complementary_labels.resize(data.labels.size());
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    out.complementary_labels[i] = rows[static_cast<std::size_t>(data.labels[i])](rng);
  }
  return out;
}

inline ComplementaryDataset select_rows(const ComplementaryDataset& data,
                                        const std::vector<Eigen::Index>& idx) {
  ComplementaryDataset out;
  out.k = data.k;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), data.dim());
  out.complementary_labels.reserve(idx.size());
  if (data.hidden_ordinary) out.hidden_ordinary.emplace().reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = data.features.row(idx[r]);
    out.complementary_labels.push_back(data.complementary_labels[static_cast<std::size_t>(idx[r])]);
    if (data.hidden_ordinary) {
      out.hidden_ordinary->push_back((*data.hidden_ordinary)[static_cast<std::size_t>(idx[r])]);
    }
  }
  return out;
}

inline LabeledDataset select_rows(const LabeledDataset& data,
                                  const std::vector<Eigen::Index>& idx) {
  LabeledDataset out;
  out.k = data.k;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), data.dim());
  out.labels.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = data.features.row(idx[r]);
    out.labels.push_back(data.labels[static_cast<std::size_t>(idx[r])]);
  }
  return out;
}

/// Uniform random split without replacement, no stratification. The
/// validation part gets round(fraction * N) samples, clamped to [1, N-1].
inline SplitPair split_train_validation(const ComplementaryDataset& data, double fraction,
                                        Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::invalid_fraction, "fraction must lie in (0, 1)");
  }
  const Eigen::Index n = data.size();
  if (n < 2) throw Error(ErrorCode::invalid_fraction, "need at least two samples to split");
  Eigen::Index n_val = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
  n_val = std::clamp<Eigen::Index>(n_val, 1, n - 1);

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitPair split;
  split.validation_indices.assign(perm.begin(), perm.begin() + n_val);
  split.train_indices.assign(perm.begin() + n_val, perm.end());
  std::sort(split.validation_indices.begin(), split.validation_indices.end());
  std::sort(split.train_indices.begin(), split.train_indices.end());
  split.train = select_rows(data, split.train_indices);
  split.validation = select_rows(data, split.validation_indices);
  return split;
}

/// Class c is centred at separation * v_c with unit isotropic noise. v_c is the
/// c-th axis when d >= K, otherwise the c-th of K evenly spaced directions in
/// the first two coordinates.
inline LabeledDataset make_gaussian_blobs(int k, int d, int n_per_class, double separation,
                                          Rng& rng) {
  if (k <= 2) throw Error(ErrorCode::invalid_argument, "blobs: need K > 2");
  if (d < 2) throw Error(ErrorCode::invalid_argument, "blobs: need d >= 2");
  if (n_per_class < 1) throw Error(ErrorCode::invalid_argument, "blobs: need n_per_class >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw Error(ErrorCode::invalid_argument, "blobs: separation must be finite and >= 0");
  }
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(k, d);
  for (int c = 0; c < k; ++c) {
    if (d >= k) {
      centers(c, c) = 1.0;
    } else {
      const double angle = 2.0 * std::numbers::pi * c / k;
      centers(c, 0) = std::cos(angle);
      centers(c, 1) = std::sin(angle);
    }
  }
  centers *= separation;

  LabeledDataset out;
  out.k = k;
  const Eigen::Index n = static_cast<Eigen::Index>(k) * n_per_class;
  out.features.resize(n, d);
  out.labels.reserve(static_cast<std::size_t>(n));
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::Index r = 0;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n_per_class; ++i, ++r) {
      for (int j = 0; j < d; ++j) out.features(r, j) = centers(c, j) + noise(rng);
      out.labels.push_back(c);
    }
  }
  return out;
}

/// CSV with header `label,f1,...,fd`.
inline void write_csv(const std::string& path, const LabeledDataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  out << "label";
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << ",f" << (j + 1);
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << data.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << ',' << data.features(i, j);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path);
}

/// FNV-1a over labels and feature bytes; used to check that every method of a
/// trial sees the same complementary dataset.
inline std::uint64_t fingerprint(const ComplementaryDataset& data) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  mix(data.complementary_labels.data(), data.complementary_labels.size() * sizeof(int));
  mix(data.features.data(), static_cast<std::size_t>(data.features.size()) * sizeof(double));
  return h;
}

}  // namespace cll
