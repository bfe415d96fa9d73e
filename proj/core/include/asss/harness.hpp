/*
 * Copyright 2026 The ASSS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment orchestration: repeated stratified cross-validation over the
// full-data baseline and every subsampling method, plus report emission.
//
// Config file (JSON), every key except dataset.path optional:
//
//   {
//     "dataset": {"path": "shuttle.dat", "format": "keel" | "csv",
//                 "label_column": "class" | 9},   (CSV only, default "class")
//     "budget_ratio": 0.3, "folds": 5, "repeats": 10,
//     "methods": ["full", "random", "kmeans", "nn-thinning", "asss"],
//     "master_seed": 0, "output_dir": "out", "workers": 0,
//     "final_classifier": {"hidden": [128, 64], "epochs": 30,
//                          "batch_size": 256, "lr": 0.001},
//     "asss": {"lambda": 0.1, "lambda_grid": [0.01, 0.1, 0.5, 1.0],
//              "tune_lambda": true, "validation_fraction": 0.2,
//              "beta": 0.01, "tau_init": 1.0, "tau_final": 0.1,
//              "epochs": 20, "total_iters": null, "batch_size": 256,
//              "lr_task": 0.001, "lr_selector": 0.0001, "clip_norm": 5.0,
//              "baseline_decay": 0.99, "selector_hidden": [64, 64],
//              "task_hidden": [128, 64],
//              "selector_inputs": "features+labels" | "features",
//              "log_interval": 1}
//   }
//
// Relative dataset paths resolve against the config file's directory.

#ifndef ASSS_HARNESS_HPP_
#define ASSS_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "asss/classifier.hpp"
#include "asss/dataio.hpp"
#include "asss/metrics.hpp"
#include "asss/trainer.hpp"

namespace asss {

enum class Method { kFull, kRandom, kKMeans, kNnThinning, kAsss };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

enum class DatasetFormat { kKeel, kCsv };

struct DatasetSource {
  std::filesystem::path path;
  DatasetFormat format = DatasetFormat::kKeel;
  LabelColumn label_column = std::string("class");  // CSV only
};

Dataset load_dataset(const DatasetSource& source);

struct AsssExperimentConfig {
  AsssConfig base;                      // lambda_sparsity is the untuned default
  std::size_t epochs = 20;              // converted to total_iters per training split
  std::optional<std::size_t> total_iters;  // overrides epochs when set
  std::vector<double> lambda_grid{0.01, 0.1, 0.5, 1.0};
  bool tune_lambda = true;
  double validation_fraction = 0.2;

  /// AsssConfig for a training split of n rows.
  AsssConfig for_split(std::size_t n, double lambda, std::uint64_t seed) const;
};

struct ExperimentConfig {
  DatasetSource dataset;
  double budget_ratio = 0.3;
  std::size_t folds = 5;
  std::size_t repeats = 10;
  std::vector<Method> methods{Method::kFull, Method::kRandom, Method::kKMeans, Method::kNnThinning, Method::kAsss};
  AsssExperimentConfig asss;
  ClassifierConfig final_classifier;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "asss-out";
  std::size_t workers = 0;  // 0: ASSS_WORKERS or the available parallelism

  void validate() const;

  /// `base_dir` resolves a relative dataset path.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

  /// Echo of the experiment-defining fields. Output location and worker
  /// count are left out so reports from different directories compare equal.
  nlohmann::json to_json() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Per-cell seed: derive_seed(master, method name, repeat, fold).
std::uint64_t cell_seed(std::uint64_t master_seed, Method method, std::size_t repeat, std::size_t fold);

/// Final-classifier seed for a (repeat, fold); shared by every method.
std::uint64_t classifier_seed(std::uint64_t master_seed, std::size_t repeat, std::size_t fold);

/// Worker count: explicit request, else ASSS_WORKERS, else hardware threads.
std::size_t resolve_worker_count(std::size_t requested);

struct CellResult {
  Method method = Method::kFull;
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::optional<std::string> error;
  MetricsReport metrics;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t budget = 0;
  std::size_t subset_size = 0;
  bool leakage_ok = false;
  bool budget_ok = false;
  std::optional<double> lambda;     // ASSS only
  std::vector<TraceRecord> trace;   // ASSS only
  std::optional<double> wall_seconds;  // not serialized

  bool ok() const { return !error.has_value(); }
};

struct LambdaTrial {
  double lambda = 0.0;
  double validation_macro_f = 0.0;
};

struct LambdaTuning {
  std::size_t repeat = 0;
  double selected = 0.0;
  std::vector<LambdaTrial> trials;
  std::optional<std::string> error;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
  double min = 0.0;
  double max = 0.0;
};

struct MethodSummary {
  Method method = Method::kFull;
  std::size_t runs = 0;
  std::size_t failed = 0;
  MetricSummary accuracy;
  MetricSummary macro_f;
  MetricSummary macro_auc;
  std::optional<PrrReport> prr;           // mean of per-(repeat, fold) ratios
  std::optional<PrrReport> prr_of_means;  // ratio of mean metrics
};

struct DatasetInfo {
  std::string name;
  std::size_t rows = 0;
  std::size_t features = 0;
  int classes = 0;
};

struct RunReport {
  DatasetInfo dataset;
  nlohmann::json config;
  std::vector<LambdaTuning> lambda_tuning;
  std::vector<CellResult> cells;  // ordered by (repeat, fold, method)
  std::vector<MethodSummary> summaries;

  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
};

using ProgressSink = std::function<void(std::string_view)>;

RunReport run_experiment(const ExperimentConfig& config, const ProgressSink& progress = {});

/// Recomputes every MethodSummary from the cells.
std::vector<MethodSummary> summarize(const std::vector<CellResult>& cells, const std::vector<Method>& methods);

/// report.json, summary.csv, prr_bars.csv, trace_asss.csv and, when wall
/// times are known, timings.csv. Throws DataError if outdir is unwritable.
void emit_reports(const RunReport& report, const std::filesystem::path& outdir);

struct SubsampleOutcome {
  Method method = Method::kRandom;
  std::size_t budget = 0;
  IndexList indices;
};

/// Selection on the whole (standardized) dataset, no cross-validation.
SubsampleOutcome run_subsample(const ExperimentConfig& config, Method method);

nlohmann::json to_json(const SubsampleOutcome& outcome, const Dataset& dataset);

/// Stored predictions: {"class_count": K, "labels": [...], "scores": [[...]]}.
struct StoredPredictions {
  int class_count = 0;
  PredictionSet predictions;
};

StoredPredictions load_predictions(const std::filesystem::path& path);

nlohmann::json to_json(const MetricsReport& metrics);

/// 17 significant digits, the rendering used for every CSV float.
std::string format_double(double value);

}  // namespace asss

#endif  // ASSS_HARNESS_HPP_
