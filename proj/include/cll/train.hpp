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

// Mini-batch Adam on the SCEL objective.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cll/data.hpp"
#include "cll/error.hpp"
#include "cll/estimator.hpp"
#include "cll/model.hpp"
#include "cll/simplex.hpp"

namespace cll {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  int epochs = 30;
  int batch_size = 256;  ///< 0 means full batch
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct TrainingCurves {
  std::vector<double> train_scel;       ///< size-weighted mean of batch losses
  std::vector<double> validation_scel;  ///< evaluated after every epoch
};

/// A trained model together with its loss curves.
struct Estimator {
  Model model;
  TrainingCurves curves;

  int k() const { return model.k(); }
  ProbMatrix predict(const Eigen::MatrixXd& x) const { return model.predict(x); }
};

/// Adam with coupled L2 weight decay (the decay term is added to the gradient).
class Adam {
 public:
  Adam(Eigen::Index n, double lr, double weight_decay, AdamConfig cfg)
      : lr_(lr), wd_(weight_decay), cfg_(cfg), m_(Eigen::VectorXd::Zero(n)),
        v_(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& params, Eigen::VectorXd grad) {
    ++t_;
    if (wd_ != 0.0) grad += wd_ * params;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    params.array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + cfg_.eps);
  }

 private:
  double lr_, wd_;
  AdamConfig cfg_;
  Eigen::VectorXd m_, v_;
  int t_ = 0;
};

inline void check_train_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !(cfg.weight_decay >= 0.0) || cfg.epochs < 0 ||
      cfg.batch_size < 0) {
    throw Error(ErrorCode::invalid_argument, "invalid training configuration");
  }
}

/// Fits `base` under `head` on split.train. Deterministic in cfg.seed: the
/// initialization and the per-epoch shuffles use derived streams of it.
inline Estimator train(BaseSpec base, HypothesisMode head, const SplitPair& split,
                       const TrainConfig& cfg) {
  check_train_config(cfg);
  const ComplementaryDataset& tr = split.train;
  const ComplementaryDataset& va = split.validation;
  if (tr.size() == 0) throw Error(ErrorCode::empty_input, "empty training split");
  if (va.size() > 0 && (va.dim() != tr.dim() || va.k != tr.k)) {
    throw Error(ErrorCode::dimension_mismatch, "train and validation shapes differ");
  }
  Rng init_rng(derive_seed(cfg.seed, 0));
  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  Estimator est{Model(base, static_cast<int>(tr.dim()), tr.k, std::move(head), init_rng), {}};
  Model& model = est.model;

  const Eigen::Index n = tr.size();
  const Eigen::Index bs = cfg.batch_size == 0 ? n : std::min<Eigen::Index>(cfg.batch_size, n);
  Adam opt(model.parameter_count(), cfg.learning_rate, cfg.weight_decay, cfg.adam);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::MatrixXd xb;
  std::vector<int> yb;
  Eigen::VectorXd grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index len = std::min(bs, n - start);
      xb.resize(len, tr.dim());
      yb.resize(static_cast<std::size_t>(len));
      for (Eigen::Index r = 0; r < len; ++r) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + r)];
        xb.row(r) = tr.features.row(src);
        yb[static_cast<std::size_t>(r)] = tr.complementary_labels[static_cast<std::size_t>(src)];
      }
      const double loss = model.loss_and_gradient(xb, yb, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw TrainingDiverged(epoch - 1, "non-finite loss in epoch " + std::to_string(epoch));
      }
      epoch_loss += loss * static_cast<double>(len);
      opt.step(model.parameters(), grad);
    }
    if (!model.parameters().allFinite()) {
      throw TrainingDiverged(epoch - 1, "parameters left the finite range in epoch " +
                                            std::to_string(epoch));
    }
    est.curves.train_scel.push_back(epoch_loss / static_cast<double>(n));
    if (va.size() > 0) {
      const double v = scel(model.predict(va.features), va.complementary_labels);
      if (!std::isfinite(v)) {
        throw TrainingDiverged(epoch - 1, "non-finite validation loss in epoch " +
                                              std::to_string(epoch));
      }
      est.curves.validation_scel.push_back(v);
    }
  }
  return est;
}

}  // namespace cll
