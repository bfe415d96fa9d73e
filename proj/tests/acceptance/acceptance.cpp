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

// Acceptance checks. One PASS/FAIL line per criterion; exit status is
// nonzero if any selected criterion fails.
//
//   asss_acceptance [--only N]...

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "asss/baselines.hpp"
#include "asss/classifier.hpp"
#include "asss/gradcheck.hpp"
#include "asss/gumbel.hpp"
#include "asss/harness.hpp"
#include "asss/metrics.hpp"
#include "asss/trainer.hpp"
#include "cli.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"
#include "test_paths.hpp"

namespace asss::acceptance {
namespace {

// Pinned thresholds.
constexpr double kGradcheckSeconds = 30.0;
constexpr double kRelaxedExampleTol = 1e-4;
constexpr double kBernoulliStdErrors = 3.0;
constexpr std::size_t kBernoulliDraws = 100000;
constexpr double kDenoiseMinGap = 0.02;
constexpr double kDenoiseSeconds = 300.0;
constexpr double kShuttleFullMacroF = 0.90;
constexpr double kShuttleAsssPrr = 0.95;
constexpr double kShuttleSeconds = 1800.0;

// Synthetic denoising setup shared by criteria 5 and 7.
constexpr std::uint64_t kMixtureSeeds[] = {1, 2, 3, 4, 5};
constexpr double kMixtureBeta = 1.0;
constexpr double kMixtureLambda = 0.0;
constexpr std::size_t kMixtureEpochs = 20;
constexpr double kBudgetRatio = 0.3;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1 ---------------------------------------------------------------------------
Verdict gradient_suite() {
  const auto start = Clock::now();
  const auto results = run_gradcheck_suite();
  const double secs = seconds_since(start);
  bool ok = secs < kGradcheckSeconds;
  std::string detail;
  for (const auto& r : results) {
    ok = ok && r.passed;
    detail += fmt::format("{} err={:.2e}/{:.0e}; ", r.name, r.max_relative_error, r.tolerance);
  }
  return {ok, detail + fmt::format("{:.1f}s", secs)};
}

// 2 ---------------------------------------------------------------------------
Verdict relaxation_suite() {
  bool ok = true;
  std::string detail;
  for (double tau : {0.05, 0.5, 1.0, 5.0}) ok = ok && relaxed_bernoulli(0.5, tau, 0.0, 0.0).z_tilde == 0.5;
  const double z = relaxed_bernoulli(0.8, 0.5, 0.3, -0.2).z_tilde;
  ok = ok && std::abs(z - 0.9775) <= kRelaxedExampleTol;
  detail += fmt::format("z(0.8,0.5,0.3,-0.2)={:.6f}; ", z);
  Rng rng(2024);
  for (double p : {0.1, 0.5, 0.9}) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < kBernoulliDraws; ++i) {
      const double g = sample_gumbel(rng);
      const double gp = sample_gumbel(rng);
      hits += relaxed_bernoulli(p, 0.05, g, gp).z_tilde > 0.5 ? 1 : 0;
    }
    const double frac = static_cast<double>(hits) / kBernoulliDraws;
    const double se = std::sqrt(p * (1.0 - p) / kBernoulliDraws);
    const double zscore = (frac - p) / se;
    ok = ok && std::abs(zscore) <= kBernoulliStdErrors;
    detail += fmt::format("p={} frac={:.4f} ({:+.2f} SE); ", p, frac, zscore);
  }
  const TemperatureSchedule schedule{1.0, 0.1, 99};
  const double first = anneal_temperature(0, schedule);
  const double last = anneal_temperature(99, schedule);
  ok = ok && first == 1.0 && last == 0.1;
  detail += fmt::format("tau[0]={} tau[T-1]={}", first, last);
  return {ok, detail};
}

// 3 ---------------------------------------------------------------------------
Verdict metrics_oracle() {
  const auto r = test::exhaustive_metric_check(6, 3);
  const std::vector<double> scores{0.1, 0.4, 0.35, 0.8};
  const std::vector<std::uint8_t> positive{0, 0, 1, 1};
  const double auc = binary_auc(scores, positive);
  const bool ok = r.f_mismatches == 0 && r.auc_mismatches == 0 && auc == 0.75;
  return {ok, fmt::format("{} instances, {} macro-F mismatches, {} AUC mismatches, {} AUC-undefined; example AUC={}",
                          r.instances, r.f_mismatches, r.auc_mismatches, r.auc_undefined, auc)};
}

// 4 ---------------------------------------------------------------------------
Verdict baseline_contracts() {
  bool ok = true;
  std::string detail;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto data = test::make_blobs(200, 4, 6, 1.5, seed);
    for (auto method : {SubsampleMethod::kRandom, SubsampleMethod::kKMeans, SubsampleMethod::kNnThinning}) {
      for (std::size_t m : {std::size_t{1}, std::size_t{40}, budget_from_ratio(data.size(), kBudgetRatio), data.size()}) {
        const auto idx = subsample(data, SubsampleSpec{method, m, seed});
        const std::set<std::size_t> distinct(idx.begin(), idx.end());
        const bool good = idx.size() == m && distinct.size() == m && (idx.empty() || idx.back() < data.size());
        if (!good) detail += fmt::format("{} M={} seed={} returned {}; ", to_string(method), m, seed, idx.size());
        ok = ok && good;
        ++checked;
      }
    }
  }
  detail += fmt::format("{} subsample calls with exact M; ", checked);

  Matrix line(10, 1);
  IndexList order(10);
  for (int i = 0; i < 10; ++i) {
    line(i, 0) = i;
    order[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
  }
  const auto kept = thin_by_radius(line, order, 1.5);
  const bool trace_ok = kept == IndexList{0, 2, 4, 6, 8};
  ok = ok && trace_ok;
  detail += fmt::format("thinning r=1.5 -> {}; ", trace_ok ? "{0,2,4,6,8}" : "mismatch");

  std::size_t steps = 0;
  bool monotone = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = test::make_blobs(150, 5, 4, 1.0, seed + 10);
    KMeansOptions opts;
    opts.relative_tolerance = 0.0;
    const auto r = lloyd_kmeans(data.features, 30, seed, opts);
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i, ++steps) {
      monotone = monotone && r.inertia_history[i] <= r.inertia_history[i - 1];
    }
  }
  ok = ok && monotone && steps > 0;
  detail += fmt::format("k-means inertia non-increasing over {} iterations: {}", steps, monotone ? "yes" : "no");
  return {ok, detail};
}

// 5 and 7 ---------------------------------------------------------------------
AsssConfig mixture_asss_config(std::uint64_t seed, std::size_t n, double lambda) {
  AsssConfig c;
  c.lambda_sparsity = lambda;
  c.beta_entropy = kMixtureBeta;
  c.seed = derive_seed(seed, "asss");
  c.total_iters = iterations_for_epochs(n, c.batch_size, kMixtureEpochs);
  c.selector_inputs = SelectorInputs::kFeaturesAndLabels;
  return c;
}

double test_macro_f(const Dataset& train, const IndexList& rows, const Dataset& test, std::uint64_t seed) {
  const Dataset subset = train.subset(rows);
  const auto model = train_classifier(subset.features, subset.labels, train.class_count, ClassifierConfig{}, seed);
  return evaluate(predict(model, test.features, test.labels), test.class_count).macro_f;
}

Verdict synthetic_denoising() {
  const auto start = Clock::now();
  double gap_sum = 0.0;
  bool scores_ok = true;
  std::string detail;
  for (std::uint64_t seed : kMixtureSeeds) {
    const auto mix = test::make_noisy_mixture(seed);
    const std::size_t n = mix.train.size();
    const std::size_t m = budget_from_ratio(n, kBudgetRatio);
    const auto config = mixture_asss_config(seed, n, kMixtureLambda);
    const auto trained = train_asss(mix.train, config);
    const auto sel = retrieve_subset(trained.selector, mix.train, TopM{m}, config.selector_inputs);
    const auto random = random_subsample(mix.train, SubsampleSpec{SubsampleMethod::kRandom, m, derive_seed(seed, "random")});
    const std::uint64_t clf_seed = derive_seed(seed, "clf");
    const double f_asss = test_macro_f(mix.train, sel.chosen, mix.test, clf_seed);
    const double f_random = test_macro_f(mix.train, random, mix.test, clf_seed);
    double noisy = 0.0;
    double clean = 0.0;
    std::size_t n_noisy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      (mix.flipped[i] ? noisy : clean) += sel.scores[i];
      n_noisy += mix.flipped[i];
    }
    noisy /= static_cast<double>(n_noisy);
    clean /= static_cast<double>(n - n_noisy);
    scores_ok = scores_ok && noisy < clean;
    gap_sum += f_asss - f_random;
    detail += fmt::format("seed {}: F {:.4f} vs {:.4f}, score noisy {:.4f} clean {:.4f}; ", seed, f_asss, f_random,
                          noisy, clean);
  }
  const double gap = gap_sum / static_cast<double>(std::size(kMixtureSeeds));
  const double secs = seconds_since(start);
  const bool ok = gap >= kDenoiseMinGap && scores_ok && secs < kDenoiseSeconds;
  return {ok, detail + fmt::format("mean gap {:+.4f} (need >= {}), {:.0f}s", gap, kDenoiseMinGap, secs)};
}

Verdict sparsity_control() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : kMixtureSeeds) {
    const auto mix = test::make_noisy_mixture(seed);
    double previous = 1.0;
    detail += fmt::format("seed {}:", seed);
    for (double lambda : {0.0, 0.1, 1.0}) {
      const auto config = mixture_asss_config(seed, mix.train.size(), lambda);
      const auto trained = train_asss(mix.train, config);
      const auto sel = retrieve_subset(trained.selector, mix.train, TopM{1}, config.selector_inputs);
      double mean = 0.0;
      for (double s : sel.scores) mean += s;
      mean /= static_cast<double>(sel.scores.size());
      ok = ok && mean <= previous;
      previous = mean;
      detail += fmt::format(" {:.4f}", mean);
    }
    detail += "; ";
  }
  return {ok, detail + "mean p* for lambda 0, 0.1, 1.0"};
}

// 6 and 8 ---------------------------------------------------------------------
struct ShuttleRun {
  std::optional<RunReport> report;
  std::string error;
  double seconds = 0.0;
};

const ShuttleRun& shuttle_run() {
  static const ShuttleRun run = [] {
    ShuttleRun out;
    const auto path = test::shuttle_path();
    if (!path) {
      out.error = "shuttle dataset not found (set ASSS_SHUTTLE_PATH or place data/shuttle.dat)";
      return out;
    }
    ExperimentConfig c;
    c.dataset = {*path, DatasetFormat::kKeel, std::string("class")};
    c.folds = 5;
    c.repeats = 2;
    c.budget_ratio = kBudgetRatio;
    c.master_seed = 1;
    const auto start = Clock::now();
    try {
      out.report = run_experiment(c);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.seconds = seconds_since(start);
    return out;
  }();
  return run;
}

const MethodSummary* find_summary(const RunReport& report, Method method) {
  for (const auto& s : report.summaries) {
    if (s.method == method) return &s;
  }
  return nullptr;
}

Verdict shuttle_desk_run() {
  const auto& run = shuttle_run();
  if (!run.report) return {false, run.error};
  const auto& r = *run.report;
  const auto* full = find_summary(r, Method::kFull);
  const auto* asss = find_summary(r, Method::kAsss);
  const auto* kmeans = find_summary(r, Method::kKMeans);
  if (!full || !asss || !kmeans || !asss->prr || !kmeans->prr) return {false, "missing method summaries"};
  const bool shape = r.dataset.rows == 58000 && r.dataset.features == 9 && r.dataset.classes == 7;
  const bool a = full->macro_f.mean >= kShuttleFullMacroF;
  const bool b = asss->prr->macro_f >= kShuttleAsssPrr;
  const bool c = asss->prr->macro_f >= kmeans->prr->macro_f;
  const bool time_ok = run.seconds < kShuttleSeconds;
  std::size_t failed = 0;
  for (const auto& s : r.summaries) failed += s.failed;
  return {shape && a && b && c && time_ok && failed == 0,
          fmt::format("{}x{} K={}; full macro-F {:.4f}; PRR(macro-F) asss {:.4f} kmeans {:.4f}; failed cells {}; {:.0f}s",
                      r.dataset.rows, r.dataset.features, r.dataset.classes, full->macro_f.mean, asss->prr->macro_f,
                      kmeans->prr->macro_f, failed, run.seconds)};
}

int invoke_cli(const std::vector<std::string>& args, std::string& err_text) {
  std::vector<const char*> argv{"asss"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  err_text = err.str();
  return code;
}

Verdict reproducibility_and_fairness() {
  test::TempDir dir("acceptance-repro");
  test::write_csv(test::make_blobs(60, 3, 5, 1.5, 8), dir / "blobs.csv");
  test::write_file(dir / "cfg.json", R"({
    "dataset": {"path": "blobs.csv", "format": "csv"},
    "folds": 3, "repeats": 2, "master_seed": 31,
    "final_classifier": {"hidden": [32, 16], "epochs": 10, "batch_size": 64},
    "asss": {"epochs": 4, "lambda_grid": [0.1, 1.0], "batch_size": 64,
             "selector_hidden": [16, 16], "task_hidden": [32, 16]}
  })");
  std::string err;
  const int a = invoke_cli({"run", (dir / "cfg.json").string(), "--out", (dir / "a").string(), "-q"}, err);
  const int b = invoke_cli({"run", (dir / "cfg.json").string(), "--out", (dir / "b").string(), "-q"}, err);
  const std::string ja = test::read_file(dir / "a" / "report.json");
  const std::string jb = test::read_file(dir / "b" / "report.json");
  const bool identical = a == 0 && b == 0 && !ja.empty() && ja == jb;
  std::string detail = fmt::format("two runs exit {} {}, report.json {} ({} bytes); ", a, b,
                                   identical ? "byte-identical" : "differs", ja.size());

  const auto& run = shuttle_run();
  if (!run.report) return {false, detail + "leakage/budget on the shuttle run not checked: " + run.error};
  std::size_t cells = 0;
  std::size_t violations = 0;
  for (const auto& cell : run.report->cells) {
    ++cells;
    if (!cell.leakage_ok || !cell.budget_ok) ++violations;
  }
  return {identical && violations == 0 && cells > 0,
          detail + fmt::format("shuttle cells {}, leakage/budget violations {}", cells, violations)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace
}  // namespace asss::acceptance

int main(int argc, char** argv) {
  using namespace asss::acceptance;
  const std::vector<Criterion> criteria{
      {1, "gradient suite", gradient_suite},
      {2, "relaxation suite", relaxation_suite},
      {3, "metrics oracle", metrics_oracle},
      {4, "baseline contracts", baseline_contracts},
      {5, "synthetic denoising", synthetic_denoising},
      {6, "shuttle desk-scale run", shuttle_desk_run},
      {7, "sparsity control", sparsity_control},
      {8, "reproducibility and fairness", reproducibility_and_fairness},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else {
      fmt::print(stderr, "usage: {} [--only N]...\n", argv[0]);
      return 2;
    }
  }
  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    fmt::print("{} criterion {} ({}): {}\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
