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

// Differentiable complementary-probability models: a softmax base network
// (linear or one hidden layer) followed by a hypothesis-mode head.
//
// All trainable parameters live in one flat vector so that the optimizer and
// finite-difference checks can treat every variant alike. Layout:
//   linear: W1 (d x K), b1 (K)
//   mlp:    W1 (d x h), b1 (h), W2 (h x K), b2 (K)
//   followed by the raw transition logits W (K x K) in CPE-T mode.
// Matrices are stored column-major.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <variant>

#include "cll/error.hpp"
#include "cll/simplex.hpp"
#include "cll/transition.hpp"

namespace cll {

namespace mode {
/// CPE-I: the base output is the estimate.
struct Identity {};
/// CPE-F, Fwd and SCL (with the uniform matrix): x -> T^T f(x).
struct FixedTransition {
  TransitionMatrix t;
};
/// CPE-T: x -> T(W)^T f(x) with T(W) the row-wise softmax of W.
struct TrainableTransition {
  Eigen::MatrixXd w;
};
/// DM: x -> softmax(1 - f(x)).
struct SoftmaxComplement {};
}  // namespace mode

using HypothesisMode = std::variant<mode::Identity, mode::FixedTransition,
                                    mode::TrainableTransition, mode::SoftmaxComplement>;

inline std::string mode_tag(const HypothesisMode& m) {
  switch (m.index()) {
    case 0: return "identity";
    case 1: return "fixed";
    case 2: return "trainable";
    default: return "softmax-complement";
  }
}

/// Row-wise softmax of raw logits, always a strictly positive stochastic matrix.
inline Eigen::MatrixXd transition_from_logits(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd t = w;
  softmax_rows_inplace(t);
  return t;
}

inline TransitionMatrix trainable_transition_matrix(const Eigen::MatrixXd& w) {
  if (!w.allFinite()) throw Error(ErrorCode::invalid_argument, "transition logits not finite");
  return TransitionMatrix(transition_from_logits(w));
}

/// W0 = log(max(T, floor)), so that T(W0) reproduces T up to the floor mass.
inline Eigen::MatrixXd init_trainable_transition(const TransitionMatrix& t,
                                                 double floor = 1e-6) {
  if (!(floor > 0.0)) throw Error(ErrorCode::invalid_argument, "floor must be positive");
  return t.matrix().array().max(floor).log().matrix();
}

inline int mode_k(const HypothesisMode& m) {
  if (const auto* f = std::get_if<mode::FixedTransition>(&m)) return f->t.k();
  if (const auto* t = std::get_if<mode::TrainableTransition>(&m)) {
    return static_cast<int>(t->w.rows());
  }
  return -1;
}

/// Maps a base output distribution through the hypothesis head.
inline SimplexVector apply_hypothesis_mode(const HypothesisMode& m,
                                           const SimplexVector& base) {
  const int k = mode_k(m);
  if (k >= 0 && k != base.size()) {
    throw Error(ErrorCode::dimension_mismatch, "hypothesis head expects K=" +
                                                   std::to_string(k));
  }
  return std::visit(
      [&](const auto& h) -> SimplexVector {
        using H = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<H, mode::Identity>) {
          return base;
        } else if constexpr (std::is_same_v<H, mode::FixedTransition>) {
          return h.t.matrix().transpose() * base;
        } else if constexpr (std::is_same_v<H, mode::TrainableTransition>) {
          return transition_from_logits(h.w).transpose() * base;
        } else {
          return softmax((1.0 - base.array()).matrix());
        }
      },
      m);
}

enum class BaseKind { linear, mlp };

struct BaseSpec {
  BaseKind kind = BaseKind::linear;
  int hidden_width = 64;  ///< mlp only
};

class Model {
 public:
  /// Initializes weights and biases from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Model(BaseSpec base, int d, int k, HypothesisMode head, Rng& rng)
      : base_(base), d_(d), k_(k), head_(std::move(head)) {
    if (d < 1 || k < 2) throw Error(ErrorCode::invalid_argument, "model needs d >= 1, K >= 2");
    if (base_.kind == BaseKind::mlp && base_.hidden_width < 1) {
      throw Error(ErrorCode::invalid_argument, "mlp hidden width must be positive");
    }
    const int hk = mode_k(head_);
    if (hk >= 0 && hk != k) {
      throw Error(ErrorCode::dimension_mismatch, "transition K differs from model K");
    }
    params_.resize(parameter_count());
    auto fill = [&](Eigen::Index off, Eigen::Index n, int fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index i = 0; i < n; ++i) params_(off + i) = u(rng);
    };
    const int h1 = first_width();
    fill(0, Eigen::Index{d_} * h1 + h1, d_);
    if (base_.kind == BaseKind::mlp) fill(w2_offset(), Eigen::Index{h1} * k_ + k_, h1);
    if (const auto* t = std::get_if<mode::TrainableTransition>(&head_)) {
      if (t->w.rows() != k_ || t->w.cols() != k_) {
        throw Error(ErrorCode::dimension_mismatch, "transition logits must be K x K");
      }
      params_.segment(wt_offset(), Eigen::Index{k_} * k_) =
          Eigen::Map<const Eigen::VectorXd>(t->w.data(), t->w.size());
    }
  }

  int d() const { return d_; }
  int k() const { return k_; }
  const BaseSpec& base() const { return base_; }

  Eigen::Index parameter_count() const {
    const Eigen::Index h1 = first_width();
    Eigen::Index n = Eigen::Index{d_} * h1 + h1;
    if (base_.kind == BaseKind::mlp) n += h1 * k_ + k_;
    if (trainable()) n += Eigen::Index{k_} * k_;
    return n;
  }

  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::VectorXd& parameters() { return params_; }

  bool trainable() const { return std::holds_alternative<mode::TrainableTransition>(head_); }

  /// Head with the current transition logits folded back in.
  HypothesisMode mode() const {
    if (trainable()) return mode::TrainableTransition{current_logits()};
    return head_;
  }

  /// Current T(W) for CPE-T.
  Eigen::MatrixXd current_transition() const {
    if (!trainable()) throw Error(ErrorCode::invalid_argument, "model has no trainable transition");
    return transition_from_logits(current_logits());
  }

  /// Base softmax output f(x; theta), N x K.
  ProbMatrix base_predict(const Eigen::MatrixXd& x) const {
    Forward fw = forward(x);
    return std::move(fw.f);
  }

  /// Complementary probability estimates, N x K.
  ProbMatrix predict(const Eigen::MatrixXd& x) const {
    Forward fw = forward(x);
    return std::move(fw.fbar);
  }

  /// SCEL over (x, labels); when `grad` is non-null it receives the gradient
  /// with respect to parameters().
  double loss_and_gradient(const Eigen::MatrixXd& x, std::span<const int> labels,
                           Eigen::VectorXd* grad) const {
    if (static_cast<Eigen::Index>(labels.size()) != x.rows() || labels.empty()) {
      throw Error(ErrorCode::dimension_mismatch, "loss: label count differs from rows");
    }
    Forward fw = forward(x);
    const Eigen::Index n = x.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    Eigen::MatrixXd g_fbar = Eigen::MatrixXd::Zero(n, k_);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int y = labels[static_cast<std::size_t>(i)];
      if (y < 0 || y >= k_) throw Error(ErrorCode::dimension_mismatch, "label outside [0, K)");
      const double p = fw.fbar(i, y);
      loss -= clamped_log(p);
      if (p >= kLogClamp) g_fbar(i, y) = -inv_n / p;
    }
    loss *= inv_n;
    if (grad == nullptr) return loss;

    grad->setZero(parameter_count());
    Eigen::MatrixXd g_f;
    std::visit(
        [&](const auto& h) {
          using H = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<H, mode::Identity>) {
            g_f = g_fbar;
          } else if constexpr (std::is_same_v<H, mode::FixedTransition>) {
            g_f = g_fbar * h.t.matrix().transpose();
          } else if constexpr (std::is_same_v<H, mode::TrainableTransition>) {
            g_f = g_fbar * fw.t.transpose();
            Eigen::MatrixXd g_t = fw.f.transpose() * g_fbar;
            Eigen::MatrixXd g_w = softmax_rows_backward(fw.t, g_t);
            grad->segment(wt_offset(), Eigen::Index{k_} * k_) =
                Eigen::Map<const Eigen::VectorXd>(g_w.data(), g_w.size());
          } else {
            g_f = -softmax_rows_backward(fw.fbar, g_fbar);
          }
        },
        head_);
    const Eigen::MatrixXd g_z = softmax_rows_backward(fw.f, g_f);

    if (base_.kind == BaseKind::linear) {
      write_dense_grad(*grad, 0, x, g_z);
    } else {
      write_dense_grad(*grad, w2_offset(), fw.hidden, g_z);
      Eigen::MatrixXd g_h = g_z * w2().transpose();
      g_h.array() *= (fw.pre.array() > 0.0).template cast<double>();
      write_dense_grad(*grad, 0, x, g_h);
    }
    return loss;
  }

 private:
  struct Forward {
    Eigen::MatrixXd pre, hidden;  // mlp only
    ProbMatrix f, fbar;
    Eigen::MatrixXd t;  // CPE-T only
  };

  int first_width() const { return base_.kind == BaseKind::mlp ? base_.hidden_width : k_; }
  Eigen::Index w2_offset() const {
    const Eigen::Index h1 = first_width();
    return Eigen::Index{d_} * h1 + h1;
  }
  Eigen::Index wt_offset() const {
    Eigen::Index off = w2_offset();
    if (base_.kind == BaseKind::mlp) off += Eigen::Index{base_.hidden_width} * k_ + k_;
    return off;
  }

  Eigen::Map<const Eigen::MatrixXd> w1() const {
    return {params_.data(), d_, first_width()};
  }
  Eigen::Map<const Eigen::VectorXd> b1() const {
    return {params_.data() + Eigen::Index{d_} * first_width(), first_width()};
  }
  Eigen::Map<const Eigen::MatrixXd> w2() const {
    return {params_.data() + w2_offset(), base_.hidden_width, k_};
  }
  Eigen::Map<const Eigen::VectorXd> b2() const {
    return {params_.data() + w2_offset() + Eigen::Index{base_.hidden_width} * k_, k_};
  }
  Eigen::MatrixXd current_logits() const {
    return Eigen::Map<const Eigen::MatrixXd>(params_.data() + wt_offset(), k_, k_);
  }

  /// Backward of a row-wise softmax: g_in_i = p_i * (g_out_i - <g_out_i, p_i>).
  static Eigen::MatrixXd softmax_rows_backward(const Eigen::MatrixXd& p,
                                               const Eigen::MatrixXd& g_out) {
    const Eigen::VectorXd dots = (p.array() * g_out.array()).rowwise().sum();
    return (p.array() * (g_out.colwise() - dots).array()).matrix();
  }

  /// Gradients of Y = X W + 1 b^T given dL/dY.
  static void write_dense_grad(Eigen::VectorXd& grad, Eigen::Index off,
                               const Eigen::MatrixXd& input, const Eigen::MatrixXd& g_out) {
    const Eigen::Index in = input.cols(), out = g_out.cols();
    Eigen::Map<Eigen::MatrixXd>(grad.data() + off, in, out).noalias() =
        input.transpose() * g_out;
    Eigen::Map<Eigen::VectorXd>(grad.data() + off + in * out, out) =
        g_out.colwise().sum().transpose();
  }

  Forward forward(const Eigen::MatrixXd& x) const {
    if (x.cols() != d_) {
      throw Error(ErrorCode::dimension_mismatch, "model expects d=" + std::to_string(d_) +
                                                     ", got " + std::to_string(x.cols()));
    }
    Forward fw;
    if (base_.kind == BaseKind::linear) {
      fw.f = (x * w1()).rowwise() + b1().transpose();
    } else {
      fw.pre = (x * w1()).rowwise() + b1().transpose();
      fw.hidden = fw.pre.cwiseMax(0.0);
      fw.f = (fw.hidden * w2()).rowwise() + b2().transpose();
    }
    softmax_rows_inplace(fw.f);
    std::visit(
        [&](const auto& h) {
          using H = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<H, mode::Identity>) {
            fw.fbar = fw.f;
          } else if constexpr (std::is_same_v<H, mode::FixedTransition>) {
            fw.fbar = fw.f * h.t.matrix();
          } else if constexpr (std::is_same_v<H, mode::TrainableTransition>) {
            fw.t = transition_from_logits(current_logits());
            fw.fbar = fw.f * fw.t;
          } else {
            fw.fbar = (1.0 - fw.f.array()).matrix();
            softmax_rows_inplace(fw.fbar);
          }
        },
        head_);
    return fw;
  }

  BaseSpec base_;
  int d_, k_;
  HypothesisMode head_;
  Eigen::VectorXd params_;
};

}  // namespace cll
