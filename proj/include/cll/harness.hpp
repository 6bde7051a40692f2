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

// Experiment runner: for every seed, generate complementary labels, split
// off a validation set, train one model per learning rate (or neighbour
// count), select by a complementary-only validation metric and score the
// selected model on held-out ordinary labels.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cll/data.hpp"
#include "cll/decode.hpp"
#include "cll/error.hpp"
#include "cll/idx.hpp"
#include "cll/knn.hpp"
#include "cll/model.hpp"
#include "cll/train.hpp"
#include "cll/transition.hpp"
#include "cll/validate.hpp"

namespace cll {

enum class Method { cpe_i, cpe_f, cpe_t, fwd_max, scl, dm, knn };
enum class TransitionKind { uniform, weak, strong, file };
enum class ValidationMetric { scel, ure };
enum class DecoderChoice { automatic, l1, max };
enum class ReportFormat { csv, json };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::cpe_i: return "cpe-i";
    case Method::cpe_f: return "cpe-f";
    case Method::cpe_t: return "cpe-t";
    case Method::fwd_max: return "fwd-max";
    case Method::scl: return "scl";
    case Method::dm: return "dm";
    case Method::knn: return "knn";
  }
  return "?";
}

inline std::string to_string(TransitionKind t) {
  switch (t) {
    case TransitionKind::uniform: return "uniform";
    case TransitionKind::weak: return "weak";
    case TransitionKind::strong: return "strong";
    case TransitionKind::file: return "file";
  }
  return "?";
}

inline std::string to_string(ValidationMetric m) { return m == ValidationMetric::scel ? "scel" : "ure"; }

template <typename Enum>
Enum parse_enum(const std::string& text, std::initializer_list<Enum> values, const char* what) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  throw Error(ErrorCode::config_error, std::string("unknown ") + what + " '" + text + "'");
}

inline Method parse_method(const std::string& s) {
  return parse_enum(s, {Method::cpe_i, Method::cpe_f, Method::cpe_t, Method::fwd_max, Method::scl,
                        Method::dm, Method::knn},
                    "method");
}
inline TransitionKind parse_transition(const std::string& s) {
  return parse_enum(s, {TransitionKind::uniform, TransitionKind::weak, TransitionKind::strong,
                        TransitionKind::file},
                    "transition");
}
inline ValidationMetric parse_metric(const std::string& s) {
  return parse_enum(s, {ValidationMetric::scel, ValidationMetric::ure}, "validation metric");
}

struct BlobsSpec {
  int k = 3;
  int d = 8;
  int n_per_class = 500;
  int test_per_class = 500;
  double separation = 8.0;
  std::uint64_t seed = 0;  ///< fixed across trials; only labels and splits vary
};

struct IdxSpec {
  std::string train_images, train_labels, test_images, test_labels;
  int train_subset = 0;  ///< first N training samples, 0 = all
  int test_subset = 0;
};

struct ExperimentConfig {
  std::variant<BlobsSpec, IdxSpec> dataset = BlobsSpec{};
  TransitionKind transition = TransitionKind::uniform;
  std::string transition_file;
  double noise_lambda = 0.0;
  Method method = Method::cpe_f;
  DecoderChoice decoder = DecoderChoice::automatic;
  BaseSpec base{BaseKind::linear, 64};
  std::vector<double> lr_grid{1e-3, 5e-4, 1e-4, 5e-5, 1e-5};
  std::vector<int> knn_grid = [] {
    std::vector<int> g;
    for (int n = 10; n <= 250; n += 10) g.push_back(n);
    return g;
  }();
  double knn_alpha = 1.0;
  int pca_dims = kDefaultPcaDims;
  int epochs = 30;
  int batch_size = 256;
  double weight_decay = 1e-4;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  double validation_fraction = 0.1;
  ValidationMetric validation_metric = ValidationMetric::scel;
  int threads = 1;
};

/// One (seed, hyperparameter) training run. For k-NN `lr` holds the
/// neighbour count.
struct CellResult {
  std::uint64_t seed = 0;
  double lr = 0.0;
  double val_metric = 0.0;
  double test_acc = 0.0;
  bool diverged = false;
  TrainingCurves curves;
};

struct SeedSelection {
  std::uint64_t seed = 0;
  double lr = 0.0;
  double val_metric = 0.0;
  double test_acc = 0.0;
  std::uint64_t data_fingerprint = 0;  ///< complementary training data + split
};

inline bool operator==(const TrainingCurves& a, const TrainingCurves& b) {
  return a.train_scel == b.train_scel && a.validation_scel == b.validation_scel;
}
inline bool operator==(const CellResult& a, const CellResult& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.seed == b.seed && a.lr == b.lr && same(a.val_metric, b.val_metric) &&
         same(a.test_acc, b.test_acc) && a.diverged == b.diverged && a.curves == b.curves;
}
inline bool operator==(const SeedSelection& a, const SeedSelection& b) {
  return a.seed == b.seed && a.lr == b.lr && a.val_metric == b.val_metric &&
         a.test_acc == b.test_acc && a.data_fingerprint == b.data_fingerprint;
}

struct ExperimentReport {
  std::string method, transition, decoder, validation_metric;
  double lambda = 0.0;
  std::vector<CellResult> cells;
  std::vector<SeedSelection> selected;
  double mean_test_acc = 0.0;
  double std_test_acc = 0.0;  ///< sample standard deviation over seeds

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Decoder actually used by a method.
inline DecodeRule resolved_decoder(const ExperimentConfig& cfg) {
  switch (cfg.decoder) {
    case DecoderChoice::l1: return DecodeRule::l1;
    case DecoderChoice::max: return DecodeRule::max;
    case DecoderChoice::automatic: break;
  }
  return cfg.method == Method::fwd_max ? DecodeRule::max : DecodeRule::l1;
}

/// Transition matrix handed to the learner in trial `seed`.
inline TransitionMatrix provided_transition(const ExperimentConfig& cfg, int k, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 10));
  switch (cfg.transition) {
    case TransitionKind::uniform: return uniform_transition(k);
    case TransitionKind::weak: return biased_transition(k, kWeakBias, rng);
    case TransitionKind::strong: return biased_transition(k, kStrongBias, rng);
    case TransitionKind::file: {
      std::ifstream in(cfg.transition_file);
      if (!in) throw Error(ErrorCode::config_error, "cannot open transition file " + cfg.transition_file);
      return read_transition(in);
    }
  }
  throw Error(ErrorCode::config_error, "unknown transition kind");
}

/// Matrix the decoder and URE work with: T-agnostic methods assume uniform.
inline TransitionMatrix effective_transition(const ExperimentConfig& cfg, const TransitionMatrix& given) {
  if (cfg.method == Method::scl || cfg.method == Method::dm) return uniform_transition(given.k());
  return given;
}

inline HypothesisMode head_for(Method m, const TransitionMatrix& given) {
  switch (m) {
    case Method::cpe_i: return mode::Identity{};
    case Method::cpe_f:
    case Method::fwd_max: return mode::FixedTransition{given};
    case Method::cpe_t: return mode::TrainableTransition{init_trainable_transition(given)};
    case Method::scl: return mode::FixedTransition{uniform_transition(given.k())};
    case Method::dm: return mode::SoftmaxComplement{};
    case Method::knn: break;
  }
  throw Error(ErrorCode::config_error, "k-NN has no hypothesis head");
}

struct DatasetPair {
  LabeledDataset train, test;
};

inline DatasetPair load_datasets(const ExperimentConfig& cfg) {
  if (const auto* b = std::get_if<BlobsSpec>(&cfg.dataset)) {
    Rng rng(derive_seed(b->seed, 0));
    DatasetPair out{make_gaussian_blobs(b->k, b->d, b->n_per_class, b->separation, rng), {}};
    out.test = make_gaussian_blobs(b->k, b->d, b->test_per_class, b->separation, rng);
    return out;
  }
  const auto& spec = std::get<IdxSpec>(cfg.dataset);
  auto head = [](LabeledDataset d, int n) {
    if (n <= 0 || n >= d.size()) return d;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    return select_rows(d, idx);
  };
  DatasetPair out{head(load_idx_pair(spec.train_images, spec.train_labels), spec.train_subset), {}};
  out.test = head(load_idx_pair(spec.test_images, spec.test_labels), spec.test_subset);
  out.train.k = out.test.k = std::max(out.train.k, out.test.k);
  if (out.train.dim() != out.test.dim()) {
    throw Error(ErrorCode::config_error, "train and test feature dimensions differ");
  }
  return out;
}

/// Checks that need no data. Throws config-error.
inline void check_config(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::config_error, m); };
  if (cfg.seeds.empty()) fail("need at least one seed");
  if (cfg.epochs < 0) fail("epochs must be non-negative");
  if (cfg.batch_size < 0) fail("batch size must be non-negative");
  if (!(cfg.weight_decay >= 0.0)) fail("weight decay must be non-negative");
  if (!(cfg.noise_lambda >= 0.0 && cfg.noise_lambda <= 1.0)) fail("lambda must lie in [0, 1]");
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
    fail("validation fraction must lie in (0, 1)");
  }
  if (cfg.threads < 1) fail("threads must be positive");
  if (cfg.method == Method::knn) {
    if (cfg.knn_grid.empty()) fail("empty neighbour grid");
    for (int n : cfg.knn_grid) {
      if (n < 1) fail("neighbour counts must be positive");
    }
    if (!(cfg.knn_alpha > 0.0)) fail("k-NN smoothing must be positive");
    if (cfg.decoder == DecoderChoice::max) fail("k-NN estimates are decoded with L1 only");
  } else {
    if (cfg.lr_grid.empty()) fail("empty learning-rate grid");
    for (double lr : cfg.lr_grid) {
      if (!(lr > 0.0)) fail("learning rates must be positive");
    }
  }
  if (cfg.method == Method::fwd_max && cfg.decoder == DecoderChoice::l1) {
    fail("fwd-max decodes with Max; use cpe-f for L1 decoding");
  }
  if (cfg.base.kind == BaseKind::mlp && cfg.base.hidden_width < 1) fail("mlp width must be positive");
  if (cfg.transition == TransitionKind::file && cfg.transition_file.empty()) {
    fail("transition=file needs a transition file");
  }
}

namespace detail {

inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline double accuracy(const Labels& pred, const Labels& truth) {
  return 1.0 - empirical_zero_one(pred, truth);
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  check_config(cfg);
  const DatasetPair data = load_datasets(cfg);
  const int k = data.train.k;
  const DecodeRule rule = resolved_decoder(cfg);

  struct Trial {
    std::uint64_t seed;
    TransitionMatrix given, decode;
  };
  std::vector<Trial> trials;
  for (const std::uint64_t seed : cfg.seeds) {
    const TransitionMatrix given = [&] {
      try {
        return provided_transition(cfg, k, seed);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::config_error) throw;
        throw Error(ErrorCode::config_error, std::string("transition: ") + e.what());
      }
    }();
    if (given.k() != k) throw Error(ErrorCode::config_error, "transition K differs from dataset K");
    const TransitionMatrix decode = effective_transition(cfg, given);
    const bool needs_inverse =
        rule == DecodeRule::max || cfg.validation_metric == ValidationMetric::ure;
    if (needs_inverse && !geometry(decode).invertible) {
      throw Error(ErrorCode::config_error,
                  "Max decoding and URE validation need an invertible transition matrix");
    }
    trials.push_back({seed, given, decode});
  }

  ExperimentReport report;
  report.method = to_string(cfg.method);
  report.transition = to_string(cfg.transition);
  report.decoder = rule == DecodeRule::max ? "max" : "l1";
  report.validation_metric = to_string(cfg.validation_metric);
  report.lambda = cfg.noise_lambda;

  for (const Trial& trial : trials) {
    const TransitionMatrix generating = mix_uniform_noise(trial.given, cfg.noise_lambda);
    Rng label_rng(derive_seed(trial.seed, 11));
    const ComplementaryDataset comp = synthesize_complementary(data.train, generating, label_rng);
    Rng split_rng(derive_seed(trial.seed, 12));
    const SplitPair split = split_train_validation(comp, cfg.validation_fraction, split_rng);
    const DecoderSpec decoder{rule, trial.decode};

    auto score = [&](const ProbMatrix& val_probs, const ProbMatrix& test_probs, CellResult& cell) {
      if (cfg.validation_metric == ValidationMetric::scel) {
        cell.val_metric = scel(val_probs, split.validation.complementary_labels);
      } else {
        cell.val_metric = ure_zero_one(decode_batch(val_probs, decoder),
                                       split.validation.complementary_labels, trial.given);
      }
      cell.test_acc = detail::accuracy(decode_batch(test_probs, decoder), data.test.labels);
    };

    std::vector<CellResult> cells;
    if (cfg.method == Method::knn) {
      const KnnEstimator knn(split.train, 1, cfg.knn_alpha, cfg.pca_dims);
      std::vector<int> grid;
      for (int n : cfg.knn_grid) {
        if (n <= split.train.size()) grid.push_back(n);
      }
      if (grid.empty()) grid.push_back(static_cast<int>(split.train.size()));
      const auto val = knn.predict_many(split.validation.features, grid);
      const auto test = knn.predict_many(data.test.features, grid);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        CellResult cell;
        cell.seed = trial.seed;
        cell.lr = grid[g];
        score(val[g], test[g], cell);
        cells.push_back(std::move(cell));
      }
    } else {
      cells.resize(cfg.lr_grid.size());
      const HypothesisMode head = head_for(cfg.method, trial.given);
      detail::parallel_for(cfg.lr_grid.size(), cfg.threads, [&](std::size_t i) {
        CellResult& cell = cells[i];
        cell.seed = trial.seed;
        cell.lr = cfg.lr_grid[i];
        TrainConfig tc;
        tc.learning_rate = cfg.lr_grid[i];
        tc.weight_decay = cfg.weight_decay;
        tc.epochs = cfg.epochs;
        tc.batch_size = cfg.batch_size;
        tc.seed = derive_seed(trial.seed, 100 + i);
        try {
          const Estimator est = train(cfg.base, head, split, tc);
          cell.curves = est.curves;
          score(est.predict(split.validation.features), est.predict(data.test.features), cell);
        } catch (const TrainingDiverged&) {
          cell.diverged = true;
          cell.val_metric = std::numeric_limits<double>::infinity();
          cell.test_acc = 0.0;
        }
      });
    }

    std::vector<std::pair<std::size_t, double>> candidates;
    for (std::size_t i = 0; i < cells.size(); ++i) candidates.emplace_back(i, cells[i].val_metric);
    const std::size_t best = select_model(candidates);
    SeedSelection sel;
    sel.seed = trial.seed;
    sel.lr = cells[best].lr;
    sel.val_metric = cells[best].val_metric;
    sel.test_acc = cells[best].test_acc;
    sel.data_fingerprint = fingerprint(split.train) ^ (fingerprint(split.validation) * 31);
    report.selected.push_back(sel);
    for (auto& c : cells) report.cells.push_back(std::move(c));
  }

  double sum = 0.0;
  for (const auto& s : report.selected) sum += s.test_acc;
  const double n = static_cast<double>(report.selected.size());
  report.mean_test_acc = sum / n;
  double sq = 0.0;
  for (const auto& s : report.selected) sq += (s.test_acc - report.mean_test_acc) * (s.test_acc - report.mean_test_acc);
  report.std_test_acc = report.selected.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// Report I/O

inline constexpr const char* kReportCsvHeader = "method,transition,lambda,seed,lr,val_metric,test_acc";

inline void write_report_csv(std::ostream& out, const ExperimentReport& r) {
  out << kReportCsvHeader << '\n' << std::setprecision(17);
  for (const auto& c : r.cells) {
    out << r.method << ',' << r.transition << ',' << r.lambda << ',' << c.seed << ',' << c.lr << ','
        << c.val_metric << ',' << c.test_acc << '\n';
  }
}

inline nlohmann::json report_to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["transition"] = r.transition;
  j["decoder"] = r.decoder;
  j["validation_metric"] = r.validation_metric;
  j["lambda"] = r.lambda;
  j["mean_test_acc"] = r.mean_test_acc;
  j["std_test_acc"] = r.std_test_acc;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json cj{{"seed", c.seed},
                      {"lr", c.lr},
                      {"test_acc", c.test_acc},
                      {"diverged", c.diverged},
                      {"train_scel", c.curves.train_scel},
                      {"val_scel", c.curves.validation_scel}};
    cj["val_metric"] = c.diverged ? nlohmann::json(nullptr) : nlohmann::json(c.val_metric);
    j["cells"].push_back(std::move(cj));
  }
  j["selected"] = nlohmann::json::array();
  for (const auto& s : r.selected) {
    j["selected"].push_back({{"seed", s.seed},
                             {"lr", s.lr},
                             {"val_metric", s.val_metric},
                             {"test_acc", s.test_acc},
                             {"data_fingerprint", s.data_fingerprint}});
  }
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport r;
    r.method = j.at("method").get<std::string>();
    r.transition = j.at("transition").get<std::string>();
    r.decoder = j.at("decoder").get<std::string>();
    r.validation_metric = j.at("validation_metric").get<std::string>();
    r.lambda = j.at("lambda").get<double>();
    r.mean_test_acc = j.at("mean_test_acc").get<double>();
    r.std_test_acc = j.at("std_test_acc").get<double>();
    for (const auto& cj : j.at("cells")) {
      CellResult c;
      c.seed = cj.at("seed").get<std::uint64_t>();
      c.lr = cj.at("lr").get<double>();
      c.test_acc = cj.at("test_acc").get<double>();
      c.diverged = cj.at("diverged").get<bool>();
      c.val_metric = cj.at("val_metric").is_null() ? std::numeric_limits<double>::infinity()
                                                   : cj.at("val_metric").get<double>();
      c.curves.train_scel = cj.at("train_scel").get<std::vector<double>>();
      c.curves.validation_scel = cj.at("val_scel").get<std::vector<double>>();
      r.cells.push_back(std::move(c));
    }
    for (const auto& sj : j.at("selected")) {
      SeedSelection s;
      s.seed = sj.at("seed").get<std::uint64_t>();
      s.lr = sj.at("lr").get<double>();
      s.val_metric = sj.at("val_metric").get<double>();
      s.test_acc = sj.at("test_acc").get<double>();
      s.data_fingerprint = sj.at("data_fingerprint").get<std::uint64_t>();
      r.selected.push_back(s);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("report: ") + e.what());
  }
}

inline void write_report(const ExperimentReport& r, const std::string& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  if (format == ReportFormat::csv) {
    write_report_csv(out, r);
  } else {
    out << report_to_json(r).dump(1) << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path);
}

inline ExperimentReport read_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("report: ") + e.what());
  }
  return report_from_json(j);
}

/// One `epoch,train_scel,val_scel` CSV per cell, named
/// <method>_<transition>_lambda<l>_seed<s>_lr<lr>.csv. Returns the paths.
inline std::vector<std::string> emit_loss_curves(const ExperimentReport& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir + ": " + ec.message());
  std::vector<std::string> paths;
  for (const auto& c : r.cells) {
    std::ostringstream name;
    name << r.method << '_' << r.transition << "_lambda" << r.lambda << "_seed" << c.seed << "_lr"
         << c.lr << ".csv";
    const std::string path = (std::filesystem::path(dir) / name.str()).string();
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
    out << "epoch,train_scel,val_scel\n" << std::setprecision(17);
    for (std::size_t e = 0; e < c.curves.train_scel.size(); ++e) {
      out << (e + 1) << ',' << c.curves.train_scel[e] << ',';
      if (e < c.curves.validation_scel.size()) out << c.curves.validation_scel[e];
      out << '\n';
    }
    if (!out) throw Error(ErrorCode::io_error, "write failed: " + path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace cll
