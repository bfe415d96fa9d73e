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

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "asss/baselines.hpp"
#include "asss/error.hpp"
#include "asss/harness.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

namespace asss {
namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override { test::write_csv(test::make_blobs(40, 3, 4, 2.0, 12), dir_ / "blobs.csv"); }

  ExperimentConfig config(std::vector<Method> methods) const {
    ExperimentConfig c;
    c.dataset = {dir_ / "blobs.csv", DatasetFormat::kCsv, std::string("class")};
    c.folds = 3;
    c.repeats = 2;
    c.methods = std::move(methods);
    c.master_seed = 77;
    c.workers = 1;
    c.final_classifier.hidden = {16};
    c.final_classifier.epochs = 15;
    c.final_classifier.batch_size = 32;
    c.asss.epochs = 3;
    c.asss.lambda_grid = {0.1, 1.0};
    c.asss.base.batch_size = 32;
    c.asss.base.selector_hidden = {8};
    c.asss.base.task_hidden = {16};
    return c;
  }

  test::TempDir dir_{"harness"};
};

TEST_F(HarnessTest, FullOnlyHasUnitPrr) {
  const auto report = run_experiment(config({Method::kFull}));
  ASSERT_EQ(report.summaries.size(), 1u);
  ASSERT_TRUE(report.summaries[0].prr.has_value());
  EXPECT_EQ(report.summaries[0].prr->accuracy, 1.0);
  EXPECT_EQ(report.summaries[0].prr->macro_f, 1.0);
  EXPECT_EQ(report.summaries[0].prr->macro_auc, 1.0);
  EXPECT_EQ(report.cells.size(), 6u);
}

TEST_F(HarnessTest, FullBudgetRandomMatchesFull) {
  auto c = config({Method::kFull, Method::kRandom});
  c.budget_ratio = 1.0;
  const auto report = run_experiment(c);
  const auto& full = report.summaries[0];
  const auto& random = report.summaries[1];
  EXPECT_NEAR(random.macro_f.mean, full.macro_f.mean, 0.05);
  EXPECT_NEAR(random.accuracy.mean, full.accuracy.mean, 0.05);
  for (const auto& cell : report.cells) {
    if (cell.method == Method::kRandom) {
      EXPECT_EQ(cell.subset_size, cell.train_size);
    }
  }
}

TEST_F(HarnessTest, CellsSatisfyLeakageBudgetAndOrdering) {
  const auto c = config({Method::kFull, Method::kRandom, Method::kKMeans, Method::kNnThinning, Method::kAsss});
  const auto report = run_experiment(c);
  ASSERT_EQ(report.cells.size(), 2u * 3u * 5u);
  std::size_t i = 0;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t f = 0; f < 3; ++f) {
      for (Method m : c.methods) {
        const auto& cell = report.cells[i++];
        EXPECT_EQ(cell.repeat, r);
        EXPECT_EQ(cell.fold, f);
        EXPECT_EQ(cell.method, m);
        EXPECT_TRUE(cell.ok()) << cell.error.value_or("");
        EXPECT_TRUE(cell.leakage_ok);
        EXPECT_TRUE(cell.budget_ok);
        EXPECT_EQ(cell.train_size + cell.test_size, 120u);
        if (m != Method::kFull) {
          EXPECT_EQ(cell.subset_size, budget_from_ratio(cell.train_size, 0.3));
        }
        EXPECT_EQ(cell.trace.empty(), m != Method::kAsss);
      }
    }
  }
  EXPECT_EQ(report.lambda_tuning.size(), 2u);
}

TEST_F(HarnessTest, ReportRoundTripReproducesCsvs) {
  const auto report = run_experiment(config({Method::kFull, Method::kRandom, Method::kAsss}));
  emit_reports(report, dir_ / "a");
  const auto reread = RunReport::from_json(nlohmann::json::parse(test::read_file(dir_ / "a" / "report.json")));
  emit_reports(reread, dir_ / "b");
  for (const char* name : {"report.json", "summary.csv", "prr_bars.csv", "trace_asss.csv"}) {
    EXPECT_EQ(test::read_file(dir_ / "a" / name), test::read_file(dir_ / "b" / name)) << name;
  }
}

TEST_F(HarnessTest, SummaryAndPrrFilesAreConsistent) {
  const auto report = run_experiment(config({Method::kFull, Method::kKMeans}));
  emit_reports(report, dir_ / "out");
  const auto summary = lines(test::read_file(dir_ / "out" / "summary.csv"));
  ASSERT_EQ(summary.size(), 1u + 2u * 3u);
  EXPECT_EQ(summary[0], "method,metric,mean,std,prr,prr_of_means");
  std::map<std::string, double> full_mean;
  std::map<std::string, double> kmeans_mean;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const auto cells = split(summary[i]);
    ASSERT_EQ(cells.size(), 6u);
    (cells[0] == "full" ? full_mean : kmeans_mean)[cells[1]] = std::stod(cells[2]);
  }
  const auto bars = lines(test::read_file(dir_ / "out" / "prr_bars.csv"));
  EXPECT_EQ(bars[0], "dataset,method,metric,prr,prr_of_means");
  ASSERT_EQ(bars.size(), 1u + 2u * 3u);
  for (std::size_t i = 1; i < bars.size(); ++i) {
    const auto cells = split(bars[i]);
    const double expected = (cells[1] == "full" ? full_mean : kmeans_mean)[cells[2]] / full_mean[cells[2]];
    EXPECT_NEAR(std::stod(cells[4]), expected, 1e-12) << bars[i];
  }
}

TEST_F(HarnessTest, DeterministicAcrossWorkerCounts) {
  auto c = config({Method::kFull, Method::kRandom, Method::kNnThinning, Method::kAsss});
  const auto a = run_experiment(c).to_json().dump(2);
  c.workers = 3;
  const auto b = run_experiment(c).to_json().dump(2);
  EXPECT_EQ(a, b);
}

TEST_F(HarnessTest, FairnessSharesClassifierSeed) {
  EXPECT_EQ(classifier_seed(1, 2, 3), classifier_seed(1, 2, 3));
  EXPECT_NE(classifier_seed(1, 2, 3), classifier_seed(1, 3, 2));
  EXPECT_NE(cell_seed(1, Method::kRandom, 0, 0), cell_seed(1, Method::kKMeans, 0, 0));
}

TEST(HarnessBudget, ShuttleFoldSize) { EXPECT_EQ(budget_from_ratio(46400, 0.3), 13920u); }

TEST(HarnessConfig, ParsesAndRejectsUnknownKeys) {
  const auto j = nlohmann::json::parse(R"({"dataset": {"path": "d.dat"}, "folds": 4, "asss": {"beta": 0.5}})");
  const auto c = ExperimentConfig::from_json(j, "/data");
  EXPECT_EQ(c.dataset.path, std::filesystem::path("/data/d.dat"));
  EXPECT_EQ(c.folds, 4u);
  EXPECT_EQ(c.asss.base.beta_entropy, 0.5);
  EXPECT_EQ(c.repeats, 10u);
  EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"dataset": {"path": "d"}, "fold": 4})")),
               InvalidArgument);
  EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"folds": 4})")), InvalidArgument);
}

TEST(HarnessConfig, MissingDatasetNamesPath) {
  ExperimentConfig c;
  c.dataset.path = "/nonexistent/nowhere.dat";
  try {
    run_experiment(c);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/nowhere.dat"), std::string::npos);
  }
}

TEST(HarnessSummary, StatisticsByHand) {
  std::vector<CellResult> cells(3);
  const double f[] = {0.5, 0.7, 0.9};
  for (std::size_t i = 0; i < 3; ++i) {
    cells[i].method = Method::kFull;
    cells[i].fold = i;
    cells[i].metrics = {f[i], f[i], f[i]};
  }
  const auto s = summarize(cells, {Method::kFull});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0].macro_f.mean, 0.7, 1e-15);
  EXPECT_NEAR(s[0].macro_f.stddev, 0.2, 1e-15);
  EXPECT_EQ(s[0].macro_f.min, 0.5);
  EXPECT_EQ(s[0].macro_f.max, 0.9);
}

TEST(HarnessWorkers, ExplicitRequestWins) { EXPECT_EQ(resolve_worker_count(3), 3u); }

}  // namespace
}  // namespace asss
