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

// JSON model checkpoints: shapes, hypothesis-mode tag and the flat parameter
// vector. Doubles are written with 17 significant digits, so a save/load
// round trip is exact.

#include <Eigen/Dense>

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cll/error.hpp"
#include "cll/model.hpp"
#include "cll/transition.hpp"

namespace cll {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto m = n > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != m) {
      throw Error(ErrorCode::format_error, "ragged matrix in checkpoint");
    }
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = j.at(r).at(c).get<double>();
  }
  return out;
}

}  // namespace detail

inline nlohmann::json checkpoint_to_json(const Model& model) {
  nlohmann::json j;
  j["format"] = "cll-model";
  j["version"] = kCheckpointVersion;
  j["base"] = model.base().kind == BaseKind::linear ? "linear" : "mlp";
  j["hidden_width"] = model.base().hidden_width;
  j["d"] = model.d();
  j["k"] = model.k();
  const HypothesisMode m = model.mode();
  j["mode"] = mode_tag(m);
  if (const auto* f = std::get_if<mode::FixedTransition>(&m)) {
    j["transition"] = detail::matrix_to_json(f->t.matrix());
  }
  const auto& p = model.parameters();
  j["parameters"] = std::vector<double>(p.data(), p.data() + p.size());
  return j;
}

inline Model checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "cll-model") {
      throw Error(ErrorCode::format_error, "not a cll model checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorCode::format_error, "unsupported checkpoint version");
    }
    BaseSpec base;
    const std::string kind = j.at("base").get<std::string>();
    if (kind == "linear") {
      base.kind = BaseKind::linear;
    } else if (kind == "mlp") {
      base.kind = BaseKind::mlp;
    } else {
      throw Error(ErrorCode::format_error, "unknown base model '" + kind + "'");
    }
    base.hidden_width = j.at("hidden_width").get<int>();
    const int d = j.at("d").get<int>();
    const int k = j.at("k").get<int>();
    const std::string tag = j.at("mode").get<std::string>();
    HypothesisMode head;
    if (tag == "identity") {
      head = mode::Identity{};
    } else if (tag == "fixed") {
      head = mode::FixedTransition{TransitionMatrix(detail::matrix_from_json(j.at("transition")))};
    } else if (tag == "trainable") {
      head = mode::TrainableTransition{Eigen::MatrixXd::Zero(k, k)};
    } else if (tag == "softmax-complement") {
      head = mode::SoftmaxComplement{};
    } else {
      throw Error(ErrorCode::format_error, "unknown hypothesis mode '" + tag + "'");
    }
    Rng unused(0);
    Model model(base, d, k, std::move(head), unused);
    const auto params = j.at("parameters").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(params.size()) != model.parameter_count()) {
      throw Error(ErrorCode::format_error, "parameter count does not match shapes");
    }
    model.parameters() = Eigen::Map<const Eigen::VectorXd>(
        params.data(), static_cast<Eigen::Index>(params.size()));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  out << checkpoint_to_json(model).dump(1) << '\n';
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path);
}

inline Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("checkpoint: ") + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace cll
