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

#include "asss/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include <fmt/format.h>

#include "asss/baselines.hpp"
#include "asss/error.hpp"
#include "asss/rng.hpp"

namespace asss {

using nlohmann::json;

namespace {

constexpr std::string_view kMetricNames[] = {"accuracy", "macro_f", "macro_auc"};

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw InvalidArgument(fmt::format("config: '{}' must be an object", where));
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidArgument(fmt::format("config: unknown key '{}' in {}", key, where));
    }
  }
}

template <typename T>
void read_key(const json& j, std::string_view key, T& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("config: bad value for '{}': {}", key, e.what()));
  }
}

double metric_value(const MetricsReport& m, std::size_t which) {
  switch (which) {
    case 0: return m.accuracy;
    case 1: return m.macro_f;
    default: return m.macro_auc;
  }
}

double prr_value(const PrrReport& m, std::size_t which) {
  switch (which) {
    case 0: return m.accuracy;
    case 1: return m.macro_f;
    default: return m.macro_auc;
  }
}

const MetricSummary& summary_metric(const MethodSummary& s, std::size_t which) {
  switch (which) {
    case 0: return s.accuracy;
    case 1: return s.macro_f;
    default: return s.macro_auc;
  }
}

std::string_view selector_inputs_name(SelectorInputs mode) {
  return mode == SelectorInputs::kFeatures ? "features" : "features+labels";
}

SelectorInputs parse_selector_inputs(std::string_view name) {
  if (name == "features") return SelectorInputs::kFeatures;
  if (name == "features+labels") return SelectorInputs::kFeaturesAndLabels;
  throw InvalidArgument(fmt::format("config: unknown selector_inputs '{}'", name));
}

SubsampleMethod baseline_method(Method method) {
  switch (method) {
    case Method::kRandom: return SubsampleMethod::kRandom;
    case Method::kKMeans: return SubsampleMethod::kKMeans;
    case Method::kNnThinning: return SubsampleMethod::kNnThinning;
    default: throw InvalidArgument("not a heuristic subsampling method");
  }
}

// Runs fn(0..count-1) on up to `workers` threads. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// A standardized (train, test) pair for one fold.
struct FoldData {
  Dataset train;
  Dataset test;
};

FoldData standardize_fold(const Dataset& dataset, std::span<const std::size_t> train_rows,
                          std::span<const std::size_t> test_rows) {
  const auto stats = fit_standardizer(dataset.features, train_rows);
  Dataset scaled = dataset;
  scaled.features = apply_standardizer(dataset.features, stats);
  return {scaled.subset(train_rows), scaled.subset(test_rows)};
}

bool sorted_disjoint(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return false;
    if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return true;
}

IndexList select_rows(const Dataset& train, Method method, std::size_t budget, const AsssExperimentConfig& asss,
                      double lambda, std::uint64_t seed, std::vector<TraceRecord>* trace) {
  if (method == Method::kFull) {
    IndexList all(train.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  if (method == Method::kAsss) {
    const AsssConfig config = asss.for_split(train.size(), lambda, seed);
    auto result = train_asss(train, config);
    if (trace != nullptr) *trace = std::move(result.trace);
    return retrieve_subset(result.selector, train, TopM{budget}, config.selector_inputs).chosen;
  }
  return subsample(train, SubsampleSpec{baseline_method(method), budget, seed});
}

MetricsReport train_and_score(const Dataset& train, std::span<const std::size_t> rows, const Dataset& test,
                              const ClassifierConfig& config, std::uint64_t seed) {
  const Dataset chosen = train.subset(rows);
  const auto model = train_classifier(chosen.features, chosen.labels, train.class_count, config, seed);
  return evaluate(predict(model, test.features, test.labels), test.class_count);
}

LambdaTuning tune_lambda(const Dataset& dataset, const FoldSplit& split, const ExperimentConfig& config,
                         std::size_t repeat) {
  LambdaTuning tuning;
  tuning.repeat = repeat;
  const auto [kept, validation] =
      stratified_holdout(dataset.labels, split.train_indices, config.asss.validation_fraction,
                         derive_seed(config.master_seed, "tune-split", repeat));
  const FoldData data = standardize_fold(dataset, kept, validation);
  const std::size_t budget = budget_from_ratio(data.train.size(), config.budget_ratio);
  double best = -1.0;
  for (double lambda : config.asss.lambda_grid) {
    const IndexList rows = select_rows(data.train, Method::kAsss, budget, config.asss, lambda,
                                       derive_seed(config.master_seed, "tune-asss", repeat), nullptr);
    const auto metrics = train_and_score(data.train, rows, data.test, config.final_classifier,
                                         derive_seed(config.master_seed, "tune-classifier", repeat));
    tuning.trials.push_back({lambda, metrics.macro_f});
    if (metrics.macro_f > best) {
      best = metrics.macro_f;
      tuning.selected = lambda;
    }
  }
  return tuning;
}

json summary_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"min", s.min}, {"max", s.max}};
}

MetricSummary summary_from_json(const json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("min").get<double>(),
          j.at("max").get<double>()};
}

json prr_json(const std::optional<PrrReport>& p) {
  if (!p) return nullptr;
  return {{"accuracy", p->accuracy}, {"macro_f", p->macro_f}, {"macro_auc", p->macro_auc}};
}

std::optional<PrrReport> prr_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return PrrReport{j.at("accuracy").get<double>(), j.at("macro_f").get<double>(), j.at("macro_auc").get<double>()};
}

MetricsReport metrics_from_json(const json& j) {
  return {j.at("accuracy").get<double>(), j.at("macro_f").get<double>(), j.at("macro_auc").get<double>()};
}

Method method_from_json(const json& j) {
  const auto name = j.get<std::string>();
  const auto m = parse_method(name);
  if (!m) throw DataError(fmt::format("report: unknown method '{}'", name));
  return *m;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kFull: return "full";
    case Method::kRandom: return "random";
    case Method::kKMeans: return "kmeans";
    case Method::kNnThinning: return "nn-thinning";
    case Method::kAsss: return "asss";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::kFull, Method::kRandom, Method::kKMeans, Method::kNnThinning, Method::kAsss}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

Dataset load_dataset(const DatasetSource& source) {
  if (!std::filesystem::exists(source.path)) {
    throw DataError(fmt::format("dataset not found: {}", source.path.string()));
  }
  Dataset ds = source.format == DatasetFormat::kKeel ? parse_keel(source.path)
                                                      : parse_csv(source.path, source.label_column);
  ds.validate();
  return ds;
}

AsssConfig AsssExperimentConfig::for_split(std::size_t n, double lambda, std::uint64_t seed) const {
  AsssConfig config = base;
  config.lambda_sparsity = lambda;
  config.seed = seed;
  config.total_iters = total_iters.value_or(iterations_for_epochs(n, base.batch_size, epochs));
  return config;
}

void ExperimentConfig::validate() const {
  if (dataset.path.empty()) throw InvalidArgument("config: dataset.path is required");
  if (!(budget_ratio > 0.0 && budget_ratio <= 1.0)) throw InvalidArgument("config: budget_ratio must be in (0, 1]");
  if (folds < 2) throw InvalidArgument("config: folds must be >= 2");
  if (repeats < 1) throw InvalidArgument("config: repeats must be >= 1");
  if (methods.empty()) throw InvalidArgument("config: methods must not be empty");
  std::set<Method> seen(methods.begin(), methods.end());
  if (seen.size() != methods.size()) throw InvalidArgument("config: duplicate method");
  asss.base.validate();
  if (asss.epochs == 0 && !asss.total_iters) throw InvalidArgument("config: asss.epochs must be >= 1");
  if (asss.lambda_grid.empty()) throw InvalidArgument("config: asss.lambda_grid must not be empty");
  for (double l : asss.lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidArgument("config: lambda values must be finite and >= 0");
  }
  if (!(asss.validation_fraction > 0.0 && asss.validation_fraction < 1.0)) {
    throw InvalidArgument("config: asss.validation_fraction must be in (0, 1)");
  }
  final_classifier.validate();
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown_keys(j,
                      {"dataset", "budget_ratio", "folds", "repeats", "methods", "master_seed", "output_dir",
                       "workers", "final_classifier", "asss"},
                      "top level");
  ExperimentConfig c;
  const auto ds = j.find("dataset");
  if (ds == j.end()) throw InvalidArgument("config: 'dataset' is required");
  reject_unknown_keys(*ds, {"path", "format", "label_column"}, "dataset");
  std::string path;
  read_key(*ds, "path", path);
  c.dataset.path = path;
  if (!c.dataset.path.empty() && c.dataset.path.is_relative() && !base_dir.empty()) {
    c.dataset.path = base_dir / c.dataset.path;
  }
  std::string format = "keel";
  read_key(*ds, "format", format);
  if (format == "keel") {
    c.dataset.format = DatasetFormat::kKeel;
  } else if (format == "csv") {
    c.dataset.format = DatasetFormat::kCsv;
  } else {
    throw InvalidArgument(fmt::format("config: unknown dataset format '{}'", format));
  }
  if (const auto lc = ds->find("label_column"); lc != ds->end()) {
    if (lc->is_string()) {
      c.dataset.label_column = lc->get<std::string>();
    } else if (lc->is_number_unsigned()) {
      c.dataset.label_column = lc->get<std::size_t>();
    } else {
      throw InvalidArgument("config: dataset.label_column must be a name or a non-negative index");
    }
  }

  read_key(j, "budget_ratio", c.budget_ratio);
  read_key(j, "folds", c.folds);
  read_key(j, "repeats", c.repeats);
  read_key(j, "master_seed", c.master_seed);
  read_key(j, "workers", c.workers);
  std::string output_dir;
  read_key(j, "output_dir", output_dir);
  if (!output_dir.empty()) c.output_dir = output_dir;
  if (const auto ms = j.find("methods"); ms != j.end()) {
    c.methods.clear();
    for (const auto& m : *ms) {
      const auto name = m.get<std::string>();
      const auto parsed = parse_method(name);
      if (!parsed) throw InvalidArgument(fmt::format("config: unknown method '{}'", name));
      c.methods.push_back(*parsed);
    }
  }
  if (const auto fc = j.find("final_classifier"); fc != j.end()) {
    reject_unknown_keys(*fc, {"hidden", "epochs", "batch_size", "lr"}, "final_classifier");
    read_key(*fc, "hidden", c.final_classifier.hidden);
    read_key(*fc, "epochs", c.final_classifier.epochs);
    read_key(*fc, "batch_size", c.final_classifier.batch_size);
    read_key(*fc, "lr", c.final_classifier.lr);
  }
  if (const auto a = j.find("asss"); a != j.end()) {
    reject_unknown_keys(*a,
                        {"lambda", "lambda_grid", "tune_lambda", "validation_fraction", "beta", "tau_init",
                         "tau_final", "epochs", "total_iters", "batch_size", "lr_task", "lr_selector", "clip_norm",
                         "baseline_decay", "selector_hidden", "task_hidden", "selector_inputs", "log_interval"},
                        "asss");
    auto& base = c.asss.base;
    read_key(*a, "lambda", base.lambda_sparsity);
    read_key(*a, "lambda_grid", c.asss.lambda_grid);
    read_key(*a, "tune_lambda", c.asss.tune_lambda);
    read_key(*a, "validation_fraction", c.asss.validation_fraction);
    read_key(*a, "beta", base.beta_entropy);
    read_key(*a, "tau_init", base.schedule.tau_init);
    read_key(*a, "tau_final", base.schedule.tau_final);
    read_key(*a, "epochs", c.asss.epochs);
    if (const auto t = a->find("total_iters"); t != a->end() && !t->is_null()) {
      c.asss.total_iters = t->get<std::size_t>();
    }
    read_key(*a, "batch_size", base.batch_size);
    read_key(*a, "lr_task", base.lr_task);
    read_key(*a, "lr_selector", base.lr_selector);
    read_key(*a, "clip_norm", base.clip_norm);
    read_key(*a, "baseline_decay", base.baseline_decay);
    read_key(*a, "selector_hidden", base.selector_hidden);
    read_key(*a, "task_hidden", base.task_hidden);
    read_key(*a, "log_interval", base.log_interval);
    std::string inputs;
    read_key(*a, "selector_inputs", inputs);
    if (!inputs.empty()) base.selector_inputs = parse_selector_inputs(inputs);
  }
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json methods_json = json::array();
  for (Method m : methods) methods_json.push_back(std::string(to_string(m)));
  json dataset_json = {{"path", dataset.path.generic_string()},
                       {"format", dataset.format == DatasetFormat::kKeel ? "keel" : "csv"}};
  if (dataset.format == DatasetFormat::kCsv) {
    if (const auto* name = std::get_if<std::string>(&dataset.label_column)) {
      dataset_json["label_column"] = *name;
    } else {
      dataset_json["label_column"] = std::get<std::size_t>(dataset.label_column);
    }
  }
  const auto& b = asss.base;
  json asss_json = {{"lambda", b.lambda_sparsity},
                    {"lambda_grid", asss.lambda_grid},
                    {"tune_lambda", asss.tune_lambda},
                    {"validation_fraction", asss.validation_fraction},
                    {"beta", b.beta_entropy},
                    {"tau_init", b.schedule.tau_init},
                    {"tau_final", b.schedule.tau_final},
                    {"epochs", asss.epochs},
                    {"total_iters", asss.total_iters ? json(*asss.total_iters) : json(nullptr)},
                    {"batch_size", b.batch_size},
                    {"lr_task", b.lr_task},
                    {"lr_selector", b.lr_selector},
                    {"clip_norm", b.clip_norm},
                    {"baseline_decay", b.baseline_decay},
                    {"selector_hidden", b.selector_hidden},
                    {"task_hidden", b.task_hidden},
                    {"selector_inputs", std::string(selector_inputs_name(b.selector_inputs))},
                    {"log_interval", b.log_interval}};
  return {{"dataset", dataset_json},
          {"budget_ratio", budget_ratio},
          {"folds", folds},
          {"repeats", repeats},
          {"methods", methods_json},
          {"master_seed", master_seed},
          {"final_classifier",
           {{"hidden", final_classifier.hidden},
            {"epochs", final_classifier.epochs},
            {"batch_size", final_classifier.batch_size},
            {"lr", final_classifier.lr}}},
          {"asss", asss_json}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError(fmt::format("config file not found: {}", path.string()));
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return ExperimentConfig::from_json(j, path.parent_path());
}

std::uint64_t cell_seed(std::uint64_t master_seed, Method method, std::size_t repeat, std::size_t fold) {
  return derive_seed(master_seed, to_string(method), repeat, fold);
}

std::uint64_t classifier_seed(std::uint64_t master_seed, std::size_t repeat, std::size_t fold) {
  return derive_seed(master_seed, "final-classifier", repeat, fold);
}

std::size_t resolve_worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ASSS_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (end != nullptr && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::vector<MethodSummary> summarize(const std::vector<CellResult>& cells, const std::vector<Method>& methods) {
  std::vector<MethodSummary> out;
  const bool has_full = std::find(methods.begin(), methods.end(), Method::kFull) != methods.end();
  for (Method method : methods) {
    MethodSummary s;
    s.method = method;
    std::vector<MetricsReport> values;
    std::vector<PrrReport> ratios;
    for (const auto& cell : cells) {
      if (cell.method != method) continue;
      if (!cell.ok()) {
        ++s.failed;
        continue;
      }
      values.push_back(cell.metrics);
      if (!has_full) continue;
      const auto full = std::find_if(cells.begin(), cells.end(), [&](const CellResult& c) {
        return c.method == Method::kFull && c.repeat == cell.repeat && c.fold == cell.fold;
      });
      if (full == cells.end() || !full->ok()) continue;
      try {
        ratios.push_back(prr(cell.metrics, full->metrics));
      } catch (const InvalidArgument&) {
        // A zero full-data metric has no defined ratio; the fold is left out.
      }
    }
    s.runs = values.size();
    auto fill = [&](MetricSummary& m, std::size_t which) {
      if (values.empty()) return;
      double sum = 0.0;
      m.min = metric_value(values.front(), which);
      m.max = m.min;
      for (const auto& v : values) {
        const double x = metric_value(v, which);
        sum += x;
        m.min = std::min(m.min, x);
        m.max = std::max(m.max, x);
      }
      m.mean = sum / static_cast<double>(values.size());
      if (values.size() > 1) {
        double ss = 0.0;
        for (const auto& v : values) ss += (metric_value(v, which) - m.mean) * (metric_value(v, which) - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
      }
      // Summation rounding can nudge the mean a hair outside [min, max].
      m.mean = std::clamp(m.mean, m.min, m.max);
    };
    fill(s.accuracy, 0);
    fill(s.macro_f, 1);
    fill(s.macro_auc, 2);
    if (!ratios.empty()) {
      PrrReport mean{};
      for (const auto& r : ratios) {
        mean.accuracy += r.accuracy;
        mean.macro_f += r.macro_f;
        mean.macro_auc += r.macro_auc;
      }
      const double count = static_cast<double>(ratios.size());
      s.prr = PrrReport{mean.accuracy / count, mean.macro_f / count, mean.macro_auc / count};
    }
    out.push_back(s);
  }
  const auto full = std::find_if(out.begin(), out.end(), [](const MethodSummary& s) { return s.method == Method::kFull; });
  if (full != out.end() && full->runs > 0) {
    const MetricsReport base{full->accuracy.mean, full->macro_f.mean, full->macro_auc.mean};
    for (auto& s : out) {
      if (s.runs == 0) continue;
      try {
        s.prr_of_means = prr(MetricsReport{s.accuracy.mean, s.macro_f.mean, s.macro_auc.mean}, base);
      } catch (const InvalidArgument&) {
        s.prr_of_means.reset();
      }
    }
  }
  return out;
}

RunReport run_experiment(const ExperimentConfig& config, const ProgressSink& progress) {
  config.validate();
  const Dataset dataset = load_dataset(config.dataset);
  if (config.budget_ratio * static_cast<double>(dataset.size()) < static_cast<double>(dataset.class_count)) {
    throw InvalidArgument(fmt::format("budget_ratio {} selects fewer rows than the {} classes", config.budget_ratio,
                                      dataset.class_count));
  }
  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    if (!progress) return;
    std::lock_guard lock(log_mutex);
    progress(line);
  };
  const std::size_t workers = resolve_worker_count(config.workers);

  std::vector<std::vector<FoldSplit>> splits;
  splits.reserve(config.repeats);
  for (std::size_t r = 0; r < config.repeats; ++r) {
    splits.push_back(stratified_kfold(dataset, config.folds, derive_seed(config.master_seed, "folds", r)));
  }

  const bool uses_asss = std::find(config.methods.begin(), config.methods.end(), Method::kAsss) != config.methods.end();
  const bool tuning = uses_asss && config.asss.tune_lambda && config.asss.lambda_grid.size() > 1;
  RunReport report;
  report.dataset = {dataset.source_name, dataset.size(), dataset.dim(), dataset.class_count};
  report.config = config.to_json();
  if (tuning) {
    report.lambda_tuning.resize(config.repeats);
    parallel_for(config.repeats, workers, [&](std::size_t r) {
      try {
        report.lambda_tuning[r] = tune_lambda(dataset, splits[r][0], config, r);
        log(fmt::format("repeat {}: lambda {} selected", r, report.lambda_tuning[r].selected));
      } catch (const std::exception& e) {
        report.lambda_tuning[r].repeat = r;
        report.lambda_tuning[r].error = e.what();
        log(fmt::format("repeat {}: lambda tuning failed: {}", r, e.what()));
      }
    });
  }

  const std::size_t per_fold = config.methods.size();
  report.cells.resize(config.repeats * config.folds * per_fold);
  parallel_for(report.cells.size(), workers, [&](std::size_t index) {
    CellResult& cell = report.cells[index];
    cell.repeat = index / (config.folds * per_fold);
    cell.fold = (index / per_fold) % config.folds;
    cell.method = config.methods[index % per_fold];
    const auto start = std::chrono::steady_clock::now();
    try {
      const FoldSplit& split = splits[cell.repeat][cell.fold];
      const FoldData data = standardize_fold(dataset, split.train_indices, split.test_indices);
      cell.train_size = data.train.size();
      cell.test_size = data.test.size();
      cell.budget = cell.method == Method::kFull ? cell.train_size
                                                 : budget_from_ratio(cell.train_size, config.budget_ratio);
      double lambda = config.asss.base.lambda_sparsity;
      if (cell.method == Method::kAsss) {
        if (tuning) {
          const auto& t = report.lambda_tuning[cell.repeat];
          if (t.error) throw Error("lambda tuning failed: " + *t.error);
          lambda = t.selected;
        }
        cell.lambda = lambda;
      }
      const IndexList local = select_rows(data.train, cell.method, cell.budget, config.asss, lambda,
                                          cell_seed(config.master_seed, cell.method, cell.repeat, cell.fold),
                                          cell.method == Method::kAsss ? &cell.trace : nullptr);
      cell.subset_size = local.size();

      IndexList global(local.size());
      for (std::size_t i = 0; i < local.size(); ++i) global[i] = split.train_indices.at(local[i]);
      std::sort(global.begin(), global.end());
      const bool distinct = std::adjacent_find(global.begin(), global.end()) == global.end();
      const bool inside_train = std::all_of(global.begin(), global.end(), [&](std::size_t g) {
        return std::binary_search(split.train_indices.begin(), split.train_indices.end(), g);
      });
      cell.leakage_ok = inside_train && sorted_disjoint(global, split.test_indices) &&
                        sorted_disjoint(split.train_indices, split.test_indices);
      cell.budget_ok = distinct && cell.subset_size == cell.budget;
      if (!cell.leakage_ok) throw Error("selected rows or standardization rows overlap the test fold");
      if (!cell.budget_ok) {
        throw Error(fmt::format("selected {} rows, budget is {}", cell.subset_size, cell.budget));
      }

      cell.metrics = train_and_score(data.train, local, data.test, config.final_classifier,
                                     classifier_seed(config.master_seed, cell.repeat, cell.fold));
      log(fmt::format("repeat {} fold {} {}: macro-F {:.4f}", cell.repeat, cell.fold, to_string(cell.method),
                      cell.metrics.macro_f));
    } catch (const std::exception& e) {
      cell.error = e.what();
      log(fmt::format("repeat {} fold {} {}: failed: {}", cell.repeat, cell.fold, to_string(cell.method), e.what()));
    }
    cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  report.summaries = summarize(report.cells, config.methods);
  return report;
}

json RunReport::to_json() const {
  json tuning = json::array();
  for (const auto& t : lambda_tuning) {
    json trials = json::array();
    for (const auto& trial : t.trials) {
      trials.push_back({{"lambda", trial.lambda}, {"validation_macro_f", trial.validation_macro_f}});
    }
    json entry = {{"repeat", t.repeat}, {"selected", t.selected}, {"trials", trials}};
    if (t.error) entry["error"] = *t.error;
    tuning.push_back(entry);
  }
  json cells_json = json::array();
  for (const auto& c : cells) {
    json cell = {{"method", std::string(asss::to_string(c.method))},
                 {"repeat", c.repeat},
                 {"fold", c.fold},
                 {"status", c.ok() ? "ok" : "error"},
                 {"train_size", c.train_size},
                 {"test_size", c.test_size},
                 {"budget", c.budget},
                 {"subset_size", c.subset_size},
                 {"leakage_ok", c.leakage_ok},
                 {"budget_ok", c.budget_ok}};
    if (c.error) cell["error"] = *c.error;
    if (c.ok()) cell["metrics"] = asss::to_json(c.metrics);
    if (c.lambda) cell["lambda"] = *c.lambda;
    if (!c.trace.empty()) {
      json rows = json::array();
      for (const auto& t : c.trace) rows.push_back({t.iter, t.task_loss, t.selector_loss, t.mean_p, t.entropy, t.tau});
      cell["trace"] = {{"columns", {"iter", "task_loss", "selector_loss", "mean_p", "entropy", "tau"}}, {"rows", rows}};
    }
    cells_json.push_back(cell);
  }
  json summary_list = json::array();
  for (const auto& s : summaries) {
    summary_list.push_back({{"method", std::string(asss::to_string(s.method))},
                            {"runs", s.runs},
                            {"failed", s.failed},
                            {"accuracy", summary_json(s.accuracy)},
                            {"macro_f", summary_json(s.macro_f)},
                            {"macro_auc", summary_json(s.macro_auc)},
                            {"prr", prr_json(s.prr)},
                            {"prr_of_means", prr_json(s.prr_of_means)}});
  }
  return {{"format", "asss-report"},
          {"version", 1},
          {"dataset",
           {{"name", dataset.name}, {"rows", dataset.rows}, {"features", dataset.features}, {"classes", dataset.classes}}},
          {"config", config},
          {"lambda_tuning", tuning},
          {"cells", cells_json},
          {"summary", summary_list}};
}

RunReport RunReport::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "asss-report" || j.at("version").get<int>() != 1) {
      throw DataError("report: unsupported format or version");
    }
    RunReport r;
    const auto& ds = j.at("dataset");
    r.dataset = {ds.at("name").get<std::string>(), ds.at("rows").get<std::size_t>(),
                 ds.at("features").get<std::size_t>(), ds.at("classes").get<int>()};
    r.config = j.at("config");
    for (const auto& t : j.at("lambda_tuning")) {
      LambdaTuning tuning;
      tuning.repeat = t.at("repeat").get<std::size_t>();
      tuning.selected = t.at("selected").get<double>();
      for (const auto& trial : t.at("trials")) {
        tuning.trials.push_back({trial.at("lambda").get<double>(), trial.at("validation_macro_f").get<double>()});
      }
      if (t.contains("error")) tuning.error = t.at("error").get<std::string>();
      r.lambda_tuning.push_back(std::move(tuning));
    }
    for (const auto& c : j.at("cells")) {
      CellResult cell;
      cell.method = method_from_json(c.at("method"));
      cell.repeat = c.at("repeat").get<std::size_t>();
      cell.fold = c.at("fold").get<std::size_t>();
      cell.train_size = c.at("train_size").get<std::size_t>();
      cell.test_size = c.at("test_size").get<std::size_t>();
      cell.budget = c.at("budget").get<std::size_t>();
      cell.subset_size = c.at("subset_size").get<std::size_t>();
      cell.leakage_ok = c.at("leakage_ok").get<bool>();
      cell.budget_ok = c.at("budget_ok").get<bool>();
      if (c.contains("error")) cell.error = c.at("error").get<std::string>();
      if (c.contains("metrics")) cell.metrics = metrics_from_json(c.at("metrics"));
      if (c.contains("lambda")) cell.lambda = c.at("lambda").get<double>();
      if (c.contains("trace")) {
        for (const auto& row : c.at("trace").at("rows")) {
          cell.trace.push_back({row.at(0).get<std::size_t>(), row.at(1).get<double>(), row.at(2).get<double>(),
                                row.at(3).get<double>(), row.at(4).get<double>(), row.at(5).get<double>()});
        }
      }
      r.cells.push_back(std::move(cell));
    }
    for (const auto& s : j.at("summary")) {
      MethodSummary m;
      m.method = method_from_json(s.at("method"));
      m.runs = s.at("runs").get<std::size_t>();
      m.failed = s.at("failed").get<std::size_t>();
      m.accuracy = summary_from_json(s.at("accuracy"));
      m.macro_f = summary_from_json(s.at("macro_f"));
      m.macro_auc = summary_from_json(s.at("macro_auc"));
      m.prr = prr_from_json(s.at("prr"));
      m.prr_of_means = prr_from_json(s.at("prr_of_means"));
      r.summaries.push_back(m);
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("report: malformed JSON: {}", e.what()));
  }
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

void emit_reports(const RunReport& report, const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec || !std::filesystem::is_directory(outdir)) {
    throw DataError(fmt::format("cannot create output directory '{}'", outdir.string()));
  }
  write_file(outdir / "report.json", report.to_json().dump(2) + "\n");

  auto optional_cell = [](const std::optional<PrrReport>& p, std::size_t which) {
    return p ? format_double(prr_value(*p, which)) : std::string();
  };
  std::string summary = "method,metric,mean,std,prr,prr_of_means\n";
  std::string bars = "dataset,method,metric,prr,prr_of_means\n";
  for (const auto& s : report.summaries) {
    for (std::size_t m = 0; m < std::size(kMetricNames); ++m) {
      const auto& ms = summary_metric(s, m);
      summary += fmt::format("{},{},{},{},{},{}\n", to_string(s.method), kMetricNames[m], format_double(ms.mean),
                             format_double(ms.stddev), optional_cell(s.prr, m), optional_cell(s.prr_of_means, m));
      if (s.prr) {
        bars += fmt::format("{},{},{},{},{}\n", report.dataset.name, to_string(s.method), kMetricNames[m],
                            optional_cell(s.prr, m), optional_cell(s.prr_of_means, m));
      }
    }
  }
  write_file(outdir / "summary.csv", summary);
  write_file(outdir / "prr_bars.csv", bars);

  std::string trace = "repeat,fold,iter,task_loss,selector_loss,mean_p,entropy,tau\n";
  for (const auto& c : report.cells) {
    if (c.method != Method::kAsss) continue;
    for (const auto& t : c.trace) {
      trace += fmt::format("{},{},{},{},{},{},{},{}\n", c.repeat, c.fold, t.iter, format_double(t.task_loss),
                           format_double(t.selector_loss), format_double(t.mean_p), format_double(t.entropy),
                           format_double(t.tau));
    }
  }
  write_file(outdir / "trace_asss.csv", trace);

  const bool timed = std::any_of(report.cells.begin(), report.cells.end(),
                                 [](const CellResult& c) { return c.wall_seconds.has_value(); });
  if (timed) {
    std::string timings = "repeat,fold,method,wall_seconds\n";
    for (const auto& c : report.cells) {
      timings += fmt::format("{},{},{},{}\n", c.repeat, c.fold, to_string(c.method),
                             c.wall_seconds ? format_double(*c.wall_seconds) : std::string());
    }
    write_file(outdir / "timings.csv", timings);
  }
}

SubsampleOutcome run_subsample(const ExperimentConfig& config, Method method) {
  if (method == Method::kFull) throw InvalidArgument("subsample: 'full' is not a subsampling method");
  config.validate();
  const Dataset raw = load_dataset(config.dataset);
  IndexList all(raw.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Dataset scaled = raw;
  scaled.features = apply_standardizer(raw.features, fit_standardizer(raw.features, all));

  SubsampleOutcome out;
  out.method = method;
  out.budget = budget_from_ratio(scaled.size(), config.budget_ratio);
  out.indices = select_rows(scaled, method, out.budget, config.asss, config.asss.base.lambda_sparsity,
                            cell_seed(config.master_seed, method, 0, 0), nullptr);
  return out;
}

json to_json(const SubsampleOutcome& outcome, const Dataset& dataset) {
  return {{"dataset", dataset.source_name},
          {"rows", dataset.size()},
          {"method", std::string(to_string(outcome.method))},
          {"budget", outcome.budget},
          {"indices", outcome.indices}};
}

StoredPredictions load_predictions(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("predictions '{}' are not valid JSON: {}", path.string(), e.what()));
  }
  try {
    StoredPredictions out;
    out.class_count = j.at("class_count").get<int>();
    const auto labels = j.at("labels").get<std::vector<ClassId>>();
    const auto scores = j.at("scores").get<std::vector<std::vector<double>>>();
    if (out.class_count < 1 || labels.empty() || scores.size() != labels.size()) {
      throw DataError("predictions: need class_count >= 1 and one score row per label");
    }
    Matrix m(static_cast<Eigen::Index>(scores.size()), out.class_count);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i].size() != static_cast<std::size_t>(out.class_count)) {
        throw DataError(fmt::format("predictions: row {} has {} scores, expected {}", i, scores[i].size(),
                                    out.class_count));
      }
      if (labels[i] < 0 || labels[i] >= out.class_count) {
        throw DataError(fmt::format("predictions: label {} out of range", labels[i]));
      }
      for (int k = 0; k < out.class_count; ++k) m(static_cast<Eigen::Index>(i), k) = scores[i][static_cast<std::size_t>(k)];
    }
    if (!m.allFinite()) throw DataError("predictions: non-finite score");
    out.predictions = PredictionSet::from_scores(labels, std::move(m));
    return out;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("predictions '{}' malformed: {}", path.string(), e.what()));
  }
}

json to_json(const MetricsReport& metrics) {
  return {{"accuracy", metrics.accuracy}, {"macro_f", metrics.macro_f}, {"macro_auc", metrics.macro_auc}};
}

}  // namespace asss
