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

// cll: run complementary-label experiments, self-verify, export curves.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cll/harness.hpp"
#include "cll/verify.hpp"

namespace {

struct RunOptions {
  std::string dataset = "blobs";
  cll::BlobsSpec blobs;
  cll::IdxSpec idx;
  std::string transition = "uniform";
  std::string method = "cpe-f";
  std::string decoder = "auto";
  std::string base = "linear";
  std::string metric = "scel";
  int seed_count = 5;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> seed_list;
  std::string out;
  std::string format;
  std::string curves_dir;
  std::string config_file;
  cll::ExperimentConfig cfg;
};

// Values from the config file fill only the options not given on the
// command line.
void apply_config_file(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw cll::Error(cll::ErrorCode::config_error, path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (!item.parents.empty() || item.name == "config") {
      throw cll::Error(cll::ErrorCode::config_error, path + ": unsupported key '" + item.fullname() + "'");
    }
    CLI::Option* opt = app->get_option_no_throw("--" + item.name);
    if (opt == nullptr) {
      throw cll::Error(cll::ErrorCode::config_error, path + ": unknown key '" + item.name + "'");
    }
    if (opt->count() > 0) continue;
    try {
      opt->add_result(item.inputs);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw cll::Error(cll::ErrorCode::config_error, path + ": " + item.name + ": " + e.what());
    }
  }
}

void add_experiment_options(CLI::App* app, RunOptions& o) {
  app->add_option("--config", o.config_file, "flat key=value file mirroring these flags")
      ->check(CLI::ExistingFile);
  app->add_option("--dataset", o.dataset, "blobs or idx")->check(CLI::IsMember({"blobs", "idx"}));
  app->add_option("--k", o.blobs.k, "classes (blobs)");
  app->add_option("--d", o.blobs.d, "feature dimension (blobs)");
  app->add_option("--n-per-class", o.blobs.n_per_class, "training points per class (blobs)");
  app->add_option("--test-per-class", o.blobs.test_per_class, "test points per class (blobs)");
  app->add_option("--separation", o.blobs.separation, "distance between class centers (blobs)");
  app->add_option("--data-seed", o.blobs.seed, "seed for the blob features");
  app->add_option("--train-images", o.idx.train_images, "IDX training images");
  app->add_option("--train-labels", o.idx.train_labels, "IDX training labels");
  app->add_option("--test-images", o.idx.test_images, "IDX test images");
  app->add_option("--test-labels", o.idx.test_labels, "IDX test labels");
  app->add_option("--train-subset", o.idx.train_subset, "use the first N training samples");
  app->add_option("--test-subset", o.idx.test_subset, "use the first N test samples");
  app->add_option("--transition", o.transition, "uniform, weak, strong or file");
  app->add_option("--transition-file", o.cfg.transition_file, "matrix file for --transition file");
  app->add_option("--lambda", o.cfg.noise_lambda, "uniform noise mixed into the generating matrix");
  app->add_option("--method", o.method, "cpe-i, cpe-f, cpe-t, fwd-max, scl, dm or knn");
  app->add_option("--decoder", o.decoder, "auto, l1 or max")
      ->check(CLI::IsMember({"auto", "l1", "max"}));
  app->add_option("--base", o.base, "linear or mlp")->check(CLI::IsMember({"linear", "mlp"}));
  app->add_option("--width", o.cfg.base.hidden_width, "mlp hidden width");
  app->add_option("--lr-grid", o.cfg.lr_grid, "learning rates")->delimiter(',');
  app->add_option("--knn-grid", o.cfg.knn_grid, "neighbour counts")->delimiter(',');
  app->add_option("--knn-alpha", o.cfg.knn_alpha, "k-NN additive smoothing");
  app->add_option("--pca-dims", o.cfg.pca_dims, "k-NN PCA dimensions");
  app->add_option("--epochs", o.cfg.epochs);
  app->add_option("--batch-size", o.cfg.batch_size, "0 = full batch");
  app->add_option("--weight-decay", o.cfg.weight_decay);
  app->add_option("--seeds", o.seed_count, "number of trials, seeded base-seed, base-seed+1, ...");
  app->add_option("--base-seed", o.base_seed);
  app->add_option("--seed-list", o.seed_list, "explicit trial seeds (overrides --seeds)")
      ->delimiter(',');
  app->add_option("--validation-metric", o.metric, "scel or ure");
  app->add_option("--val-fraction", o.cfg.validation_fraction);
  app->add_option("--threads", o.cfg.threads, "parallel cells within a seed");
}

cll::ExperimentConfig finish(RunOptions& o) {
  cll::ExperimentConfig cfg = o.cfg;
  if (o.dataset == "blobs") {
    cfg.dataset = o.blobs;
  } else {
    if (o.idx.train_images.empty() || o.idx.train_labels.empty() || o.idx.test_images.empty() ||
        o.idx.test_labels.empty()) {
      throw cll::Error(cll::ErrorCode::config_error, "--dataset idx needs all four IDX paths");
    }
    cfg.dataset = o.idx;
  }
  cfg.transition = cll::parse_transition(o.transition);
  cfg.method = cll::parse_method(o.method);
  if (o.decoder == "l1") {
    cfg.decoder = cll::DecoderChoice::l1;
  } else if (o.decoder == "max") {
    cfg.decoder = cll::DecoderChoice::max;
  } else if (o.decoder == "auto") {
    cfg.decoder = cll::DecoderChoice::automatic;
  } else {
    throw cll::Error(cll::ErrorCode::config_error, "unknown decoder '" + o.decoder + "'");
  }
  if (o.base != "linear" && o.base != "mlp") {
    throw cll::Error(cll::ErrorCode::config_error, "unknown base model '" + o.base + "'");
  }
  if (o.dataset != "blobs" && o.dataset != "idx") {
    throw cll::Error(cll::ErrorCode::config_error, "unknown dataset '" + o.dataset + "'");
  }
  cfg.base.kind = o.base == "mlp" ? cll::BaseKind::mlp : cll::BaseKind::linear;
  cfg.validation_metric = cll::parse_metric(o.metric);
  if (!o.seed_list.empty()) {
    cfg.seeds = o.seed_list;
  } else {
    if (o.seed_count < 1) throw cll::Error(cll::ErrorCode::config_error, "--seeds must be positive");
    cfg.seeds.clear();
    for (int s = 0; s < o.seed_count; ++s) cfg.seeds.push_back(o.base_seed + static_cast<std::uint64_t>(s));
  }
  return cfg;
}

cll::ReportFormat format_for(const std::string& path, const std::string& requested) {
  if (requested == "json") return cll::ReportFormat::json;
  if (requested == "csv") return cll::ReportFormat::csv;
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? cll::ReportFormat::json : cll::ReportFormat::csv;
}

void print_summary(const cll::ExperimentReport& r) {
  std::printf("%s transition=%s lambda=%g decoder=%s metric=%s\n", r.method.c_str(),
              r.transition.c_str(), r.lambda, r.decoder.c_str(), r.validation_metric.c_str());
  for (const auto& s : r.selected) {
    std::printf("  seed %llu  selected %-8g val %.6f  test acc %.4f\n",
                static_cast<unsigned long long>(s.seed), s.lr, s.val_metric, s.test_acc);
  }
  std::printf("  accuracy %.4f +- %.4f over %zu seeds\n", r.mean_test_acc, r.std_test_acc,
              r.selected.size());
}

int run_verify(bool quick) {
  bool ok = true;
  for (const auto& c : cll::run_verification(quick)) {
    std::printf("[%s] %-20s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

int write_transition(const std::string& kind, int k, std::uint64_t seed, double lambda,
                     const std::string& out) {
  cll::ExperimentConfig cfg;
  cfg.transition = cll::parse_transition(kind);
  if (cfg.transition == cll::TransitionKind::file) {
    throw cll::Error(cll::ErrorCode::config_error, "pick uniform, weak or strong");
  }
  const auto t = cll::mix_uniform_noise(cll::provided_transition(cfg, k, seed), lambda);
  if (out.empty() || out == "-") {
    cll::write_transition(std::cout, t);
  } else {
    std::ofstream f(out);
    if (!f) throw cll::Error(cll::ErrorCode::io_error, "cannot open " + out);
    cll::write_transition(f, t);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning from complementary labels with class-probability estimates"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "train and evaluate one configuration");
  add_experiment_options(run, run_opts);
  run->add_option("--out", run_opts.out, "report path (.json for JSON, otherwise CSV)");
  run->add_option("--format", run_opts.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--curves-dir", run_opts.curves_dir, "also write per-cell loss curves here");

  bool quick = false;
  auto* verify = app.add_subcommand("verify", "run the built-in property checks");
  verify->add_flag("--quick", quick, "smaller samples");

  RunOptions curve_opts;
  std::string report_in;
  auto* curves = app.add_subcommand("curves", "write epoch,train_scel,val_scel CSVs");
  add_experiment_options(curves, curve_opts);
  curves->add_option("--report", report_in, "JSON report to read instead of running");
  curves->add_option("--out-dir", curve_opts.curves_dir, "output directory")->required();

  std::string t_kind = "strong", t_out;
  int t_k = 10;
  std::uint64_t t_seed = 0;
  double t_lambda = 0.0;
  auto* trans = app.add_subcommand("transition", "print a generated transition matrix");
  trans->add_option("--kind", t_kind, "uniform, weak or strong");
  trans->add_option("--k", t_k);
  trans->add_option("--seed", t_seed);
  trans->add_option("--lambda", t_lambda);
  trans->add_option("--out", t_out, "file, or - for stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    apply_config_file(run, run_opts.config_file);
    apply_config_file(curves, curve_opts.config_file);
    if (*verify) return run_verify(quick);
    if (*trans) return write_transition(t_kind, t_k, t_seed, t_lambda, t_out);
    if (*curves) {
      const auto report = report_in.empty() ? cll::run_experiment(finish(curve_opts))
                                            : cll::read_report_json(report_in);
      const auto paths = cll::emit_loss_curves(report, curve_opts.curves_dir);
      std::printf("wrote %zu curve files to %s\n", paths.size(), curve_opts.curves_dir.c_str());
      return 0;
    }
    const auto report = cll::run_experiment(finish(run_opts));
    print_summary(report);
    if (!run_opts.out.empty()) {
      cll::write_report(report, run_opts.out, format_for(run_opts.out, run_opts.format));
    }
    if (!run_opts.curves_dir.empty()) cll::emit_loss_curves(report, run_opts.curves_dir);
    return 0;
  } catch (const cll::Error& e) {
    std::fprintf(stderr, "cll: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cll: %s\n", e.what());
    return 3;
  }
}
