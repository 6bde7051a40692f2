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

// Self-checks behind `cll verify`. Each check draws from a fixed seed so a
// run is reproducible; `quick` shrinks the sample sizes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "cll/data.hpp"
#include "cll/decode.hpp"
#include "cll/model.hpp"
#include "cll/transition.hpp"
#include "cll/validate.hpp"

namespace cll {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Chi-square(df) quantile at standard-normal quantile z (Wilson-Hilferty).
inline double chi_square_quantile_wh(double df, double z) {
  const double c = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - c + z * std::sqrt(c), 3.0);
}

inline constexpr double kZ99 = 2.3263478740408408;

namespace verify_detail {

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

inline std::vector<int> labels(int n, int k, Rng& rng) {
  std::uniform_int_distribution<int> u(0, k - 1);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = u(rng);
  return y;
}

inline ProbMatrix random_rows(int n, int k, Rng& rng) {
  ProbMatrix f(n, k);
  for (int i = 0; i < n; ++i) f.row(i) = random_simplex(k, rng).transpose();
  return f;
}

}  // namespace verify_detail

inline CheckResult check_decoder_equivalence(int samples) {
  long mismatches = 0, checked = 0;
  for (int k : {3, 5, 10}) {
    Rng rng(derive_seed(1, static_cast<std::uint64_t>(k)));
    const auto u = uniform_transition(k);
    const MaxDecoder max(u);
    for (int n = 0; n < samples; ++n) {
      const SimplexVector f = random_simplex(k, rng);
      Eigen::VectorXd sorted = f;
      std::sort(sorted.begin(), sorted.end());
      if (sorted(1) - sorted(0) <= 1e-9) continue;
      Eigen::Index argmin = 0;
      f.minCoeff(&argmin);
      const int a = max(f), b = decode_l1(f, u);
      if (a != b || b != static_cast<int>(argmin)) ++mismatches;
      ++checked;
    }
  }
  return {"decoder-equivalence", mismatches == 0,
          std::to_string(mismatches) + " mismatches in " + std::to_string(checked)};
}

inline CheckResult check_scl_identity(int pairs) {
  constexpr int k = 10;
  double worst = 0.0;
  for (int s = 0; s < pairs; ++s) {
    Rng rng(derive_seed(2, static_cast<std::uint64_t>(s)));
    Model model({s % 2 ? BaseKind::mlp : BaseKind::linear, 8}, 4, k,
                mode::FixedTransition{uniform_transition(k)}, rng);
    model.parameters() *= 3.0;
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(20, 4, [&] {
      return std::normal_distribution<double>(0.0, 1.0)(rng);
    });
    const auto y = verify_detail::labels(20, k, rng);
    const ProbMatrix f = model.base_predict(x);
    double scl = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) scl -= std::log(1.0 - f(static_cast<Eigen::Index>(i), y[i]));
    scl /= static_cast<double>(y.size());
    worst = std::max(worst, std::fabs(model.loss_and_gradient(x, y, nullptr) - scl - std::log(k - 1.0)));
  }
  return {"scl-identity", worst < 1e-9, "max deviation " + verify_detail::fmt(worst)};
}

inline CheckResult check_constant_offset() {
  constexpr int k = 3, n = 50;
  const auto t = uniform_transition(k);
  Rng rng(3);
  const auto y = verify_detail::labels(n, k, rng);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int trial = 0; trial < 10; ++trial) {
    const ProbMatrix f = verify_detail::random_rows(n, k, rng);
    const double offset = expected_scel(f, y, t) - exact_estimation_risk(f, y, t, RiskLoss::kl);
    lo = std::min(lo, offset);
    hi = std::max(hi, offset);
  }
  return {"constant-offset", hi - lo < 1e-9, "spread " + verify_detail::fmt(hi - lo)};
}

inline CheckResult check_bounds(int estimators) {
  long violations = 0, checked = 0;
  for (int k : {3, 10}) {
    for (double lambda : {0.0, 0.2, 0.5}) {
      Rng rng(derive_seed(4, static_cast<std::uint64_t>(k * 10 + lambda * 10)));
      const auto t = k == 3 ? uniform_transition(3) : biased_transition(k, kStrongBias, rng);
      const auto t_true = mix_uniform_noise(t, lambda);
      const double gamma = geometry(t).gamma_l1;
      const double eps = perturbation_radius(t_true, t);
      for (int e = 0; e < estimators; ++e) {
        const auto y = verify_detail::labels(60, k, rng);
        const double mix = std::pow(e / std::max(1.0, estimators - 1.0), 0.25);
        ProbMatrix f = verify_detail::random_rows(60, k, rng) * (1.0 - mix);
        for (int i = 0; i < 60; ++i) f.row(i) += mix * t_true.matrix().row(y[static_cast<std::size_t>(i)]);
        const double r01 = empirical_zero_one(decode_batch(f, {DecodeRule::l1, t}), y);
        const double kl = exact_estimation_risk(f, y, t_true, RiskLoss::kl);
        if (r01 > zero_one_bound(kl, gamma, BoundForm::kl, eps) + 1e-12) ++violations;
        if (lambda == 0.0 &&
            r01 > zero_one_bound(exact_estimation_risk(f, y, t, RiskLoss::l1), gamma, BoundForm::generic) + 1e-12) {
          ++violations;
        }
        ++checked;
      }
    }
  }
  return {"risk-bounds", violations == 0,
          std::to_string(violations) + " violations in " + std::to_string(checked)};
}

inline CheckResult check_gradients(int instances) {
  double worst = 0.0;
  for (int s = 0; s < instances; ++s) {
    Rng rng(derive_seed(5, static_cast<std::uint64_t>(s)));
    const int k = 3 + s % 3;
    HypothesisMode head;
    switch (s % 4) {
      case 0: head = mode::Identity{}; break;
      case 1: {
        Eigen::MatrixXd m(k, k);
        for (int i = 0; i < k; ++i) m.row(i) = random_simplex(k, rng).transpose();
        head = mode::FixedTransition{TransitionMatrix(m)};
        break;
      }
      case 2: head = mode::TrainableTransition{Eigen::MatrixXd::Random(k, k)}; break;
      default: head = mode::SoftmaxComplement{}; break;
    }
    Model model({s % 2 ? BaseKind::mlp : BaseKind::linear, 5}, 3, k, head, rng);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 3) * 2.0;
    const auto y = verify_detail::labels(8, k, rng);
    Eigen::VectorXd g;
    model.loss_and_gradient(x, y, &g);
    auto& p = model.parameters();
    constexpr double h = 1e-5;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p(i);
      p(i) = saved + h;
      const double up = model.loss_and_gradient(x, y, nullptr);
      p(i) = saved - h;
      const double down = model.loss_and_gradient(x, y, nullptr);
      p(i) = saved;
      const double num = (up - down) / (2.0 * h);
      const double scale = std::max(std::fabs(num), std::fabs(g(i)));
      worst = std::max(worst, scale < 1e-7 ? std::fabs(num - g(i)) : std::fabs(num - g(i)) / scale);
    }
  }
  return {"gradients", worst < 1e-4, "worst relative error " + verify_detail::fmt(worst)};
}

/// Chi-square goodness of fit of complementary-label draws, one test per
/// row. Zero-probability cells must stay empty and are left out of the
/// statistic.
inline CheckResult check_sampling(int draws) {
  constexpr int k = 10;
  Rng rng(6);
  const auto strong = biased_transition(k, kStrongBias, rng);
  const std::vector<std::pair<std::string, TransitionMatrix>> mats{
      {"uniform", uniform_transition(k)},
      {"weak", biased_transition(k, kWeakBias, rng)},
      {"strong", strong},
      {"mixed", mix_uniform_noise(strong, 0.5)}};
  int failed = 0;
  std::string worst;
  for (const auto& [name, t] : mats) {
    for (int row = 0; row < k; ++row) {
      LabeledDataset d;
      d.k = k;
      d.features = Eigen::MatrixXd::Zero(draws, 1);
      d.labels.assign(static_cast<std::size_t>(draws), row);
      const auto comp = synthesize_complementary(d, t, rng);
      std::vector<double> counts(k, 0.0);
      for (int c : comp.complementary_labels) counts[static_cast<std::size_t>(c)] += 1.0;
      double stat = 0.0;
      int cells = 0;
      bool leaked = false;
      for (int j = 0; j < k; ++j) {
        const double expected = t(row, j) * draws;
        if (expected == 0.0) {
          leaked = leaked || counts[static_cast<std::size_t>(j)] != 0.0;
          continue;
        }
        stat += std::pow(counts[static_cast<std::size_t>(j)] - expected, 2) / expected;
        ++cells;
      }
      if (leaked || stat > chi_square_quantile_wh(cells - 1, kZ99)) {
        ++failed;
        worst = name + " row " + std::to_string(row);
      }
    }
  }
  return {"sampling", failed == 0,
          failed == 0 ? std::to_string(mats.size() * k) + " rows fit" : "failed at " + worst};
}

inline CheckResult check_ure() {
  const auto t = uniform_transition(3);
  bool hand = true;
  for (int cbar = 0; cbar < 3; ++cbar) {
    for (int pred = 0; pred < 3; ++pred) {
      const int p[] = {pred}, c[] = {cbar};
      hand = hand && std::fabs(ure_zero_one(p, c, t) - (pred == cbar ? 2.0 : 0.0)) < 1e-12;
    }
  }
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto y = verify_detail::labels(40, 3, rng);
    const auto pred = verify_detail::labels(40, 3, rng);
    worst = std::max(worst, std::fabs(ure_zero_one_expected(pred, y, t, t) - empirical_zero_one(pred, y)));
  }
  return {"ure", hand && worst < 1e-10,
          std::string(hand ? "" : "hand values wrong; ") + "max gap " + verify_detail::fmt(worst)};
}

inline std::vector<CheckResult> run_verification(bool quick = false) {
  return {check_decoder_equivalence(quick ? 1000 : 10000),
          check_scl_identity(quick ? 20 : 100),
          check_constant_offset(),
          check_bounds(quick ? 20 : 100),
          check_gradients(20),
          check_sampling(quick ? 20000 : 100000),
          check_ure()};
}

}  // namespace cll
