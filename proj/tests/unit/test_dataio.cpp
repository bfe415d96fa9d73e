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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <gtest/gtest.h>

#include "asss/dataio.hpp"
#include "asss/error.hpp"
#include "asss/rng.hpp"
#include "test_paths.hpp"

namespace asss {
namespace {

std::filesystem::path data(const char* name) { return test::data_dir() / name; }

Dataset labelled(std::vector<ClassId> labels, int k) {
  Dataset ds;
  ds.features = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), 1);
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) ds.features(i, 0) = static_cast<double>(i);
  ds.labels = std::move(labels);
  ds.class_count = k;
  return ds;
}

TEST(Keel, ThreeRowFileMapsClassesInOrderOfAppearance) {
  const Dataset ds = parse_keel(data("tiny.dat"));
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.dim(), 2u);
  EXPECT_EQ(ds.class_count, 2);
  EXPECT_EQ(ds.labels, (std::vector<ClassId>{0, 1, 0}));
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"x1", "x2"}));
  EXPECT_DOUBLE_EQ(ds.features(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(ds.features(2, 1), 1.0);
  EXPECT_EQ(ds.source_name, "tiny");
}

TEST(Keel, NominalInputIsOneHotExpanded) {
  const Dataset ds = parse_keel(data("nominal.dat"));
  ASSERT_EQ(ds.dim(), 4u);  // size + three colour levels
  EXPECT_EQ(ds.feature_names[1], "colour=red");
  EXPECT_EQ(ds.feature_names[2], "colour=green");
  EXPECT_EQ(ds.feature_names[3], "colour=blue");
  // Row 0 is green, row 2 blue.
  EXPECT_DOUBLE_EQ(ds.features(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(ds.features(0, 1) + ds.features(0, 3), 0.0);
  EXPECT_DOUBLE_EQ(ds.features(2, 3), 1.0);
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    EXPECT_DOUBLE_EQ(ds.features.row(i).tail(3).sum(), 1.0);
  }
  EXPECT_EQ(ds.labels, (std::vector<ClassId>{0, 1, 1, 0}));  // "no" appears first
}

TEST(Keel, MalformedHeaderReportsLineNumber) {
  try {
    parse_keel(data("bad_header.dat"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Keel, RowArityMismatchIsParseError) {
  try {
    parse_keel(data("bad_arity.dat"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
  }
}

TEST(Keel, UndeclaredClassTokenIsParseError) { EXPECT_THROW(parse_keel(data("unseen_class.dat")), ParseError); }

TEST(Keel, MissingValueIsRejected) {
  const std::string text = "@relation m\n@attribute x real\n@attribute c {a,b}\n@data\n?, a\n1, b\n";
  EXPECT_THROW(parse_keel_text(text, "m"), ParseError);
}

TEST(Keel, MissingFileIsDataError) { EXPECT_THROW(parse_keel(data("no_such_file.dat")), DataError); }

TEST(Csv, LabelsTakeFirstAppearanceIds) {
  const Dataset ds = parse_csv(data("labels01.csv"), std::string("target"));
  EXPECT_EQ(ds.size(), 4u);
  EXPECT_EQ(ds.class_count, 2);
  // Token "1" is seen first, so it becomes id 0.
  EXPECT_EQ(ds.labels, (std::vector<ClassId>{0, 1, 0, 1}));
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"1", "0"}));
}

TEST(Csv, LabelColumnByIndex) {
  const Dataset by_name = parse_csv(data("labels01.csv"), std::string("target"));
  const Dataset by_index = parse_csv(data("labels01.csv"), std::size_t{2});
  EXPECT_EQ(by_name, by_index);
}

TEST(Csv, EquivalentToKeelFieldForField) {
  const Dataset keel = parse_keel(data("tiny.dat"));
  const Dataset csv = parse_csv(data("tiny.csv"), std::string("class"));
  EXPECT_EQ(keel, csv);
}

TEST(Csv, MissingLabelColumn) {
  EXPECT_THROW(parse_csv(data("labels01.csv"), std::string("nope")), DataError);
  EXPECT_THROW(parse_csv(data("labels01.csv"), std::size_t{9}), DataError);
}

TEST(Csv, NonNumericCellIsParseError) {
  try {
    parse_csv(data("nonnumeric.csv"), std::string("y"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Csv, QuotedFieldsAndCrLf) {
  const std::string text = "\"feat, one\",\"y\"\r\n\"1.5\",\"x \"\"q\"\"\"\r\n2.5,z\r\n";
  const Dataset ds = parse_csv_text(text, std::string("y"), "q");
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"feat, one"}));
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"x \"q\"", "z"}));
  EXPECT_DOUBLE_EQ(ds.features(1, 0), 2.5);
}

TEST(Csv, ConstantColumnStandardizesToZero) {
  const Dataset ds = parse_csv(data("constant.csv"), std::string("y"));
  const IndexList all{0, 1, 2, 3};
  const auto stats = fit_standardizer(ds.features, all);
  EXPECT_DOUBLE_EQ(stats.stddev(1), kStddevFloor);
  const Matrix z = apply_standardizer(ds.features, stats);
  EXPECT_TRUE(z.allFinite());
  for (Eigen::Index i = 0; i < z.rows(); ++i) EXPECT_DOUBLE_EQ(z(i, 1), 0.0);
}

TEST(Standardizer, TwoRowExample) {
  Matrix x(2, 1);
  x << 0.0, 2.0;
  const IndexList rows{0, 1};
  const auto s = fit_standardizer(x, rows);
  EXPECT_DOUBLE_EQ(s.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(s.stddev(0), 1.0);
}

TEST(Standardizer, ConstantColumnUsesFloor) {
  Matrix x(2, 1);
  x << 5.0, 5.0;
  const IndexList rows{0, 1};
  const auto s = fit_standardizer(x, rows);
  EXPECT_DOUBLE_EQ(s.mean(0), 5.0);
  EXPECT_DOUBLE_EQ(s.stddev(0), 1e-8);
}

TEST(Standardizer, FourRowPopulationStddev) {
  Matrix x(4, 1);
  x << 1.0, 2.0, 3.0, 4.0;
  const IndexList rows{0, 1, 2, 3};
  const auto s = fit_standardizer(x, rows);
  // Squared deviations 2.25, 0.25, 0.25, 2.25 sum to 5; 5 / 4 = 1.25.
  EXPECT_DOUBLE_EQ(s.mean(0), 2.5);
  EXPECT_NEAR(s.stddev(0), std::sqrt(1.25), 1e-15);
  EXPECT_NEAR(s.stddev(0), 1.1180, 5e-5);
}

TEST(Standardizer, FitsOnSubsetOnly) {
  Matrix x(4, 2);
  x << 1.0, 10.0,  //
      3.0, 30.0,   //
      100.0, -5.0, //
      5.0, 50.0;
  const IndexList train{0, 1, 3};
  const auto s = fit_standardizer(x, train);
  // Train column 0: mean 3, deviations (-2, 0, 2), population variance 8/3.
  EXPECT_DOUBLE_EQ(s.mean(0), 3.0);
  EXPECT_NEAR(s.stddev(0), std::sqrt(8.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(s.mean(1), 30.0);
  const Matrix z = apply_standardizer(x, s);
  // Held-out row 2 uses the train statistics.
  EXPECT_NEAR(z(2, 0), (100.0 - 3.0) / std::sqrt(8.0 / 3.0), 1e-12);
  EXPECT_NEAR(z(2, 1), (-5.0 - 30.0) / std::sqrt(800.0 / 3.0), 1e-12);
}

TEST(Standardizer, Errors) {
  Matrix x(2, 2);
  x.setOnes();
  EXPECT_THROW(fit_standardizer(x, IndexList{}), InvalidArgument);
  const auto s = fit_standardizer(x, IndexList{0, 1});
  Matrix wrong(2, 3);
  wrong.setZero();
  EXPECT_THROW(apply_standardizer(wrong, s), InvalidArgument);
}

TEST(Standardizer, RoundTripProperty) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(40));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(6));
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) x(i, j) = 100.0 * rng.normal() + 7.0 * static_cast<double>(j);
    }
    IndexList all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const Matrix z = apply_standardizer(x, fit_standardizer(x, all));
    for (Eigen::Index j = 0; j < d; ++j) {
      const double mean = z.col(j).mean();
      const double var = (z.col(j).array() - mean).square().mean();
      EXPECT_NEAR(mean, 0.0, 1e-9);
      EXPECT_NEAR(std::sqrt(var), 1.0, 1e-6);
    }
  }
}

TEST(StratifiedKFold, TenBalancedSamplesGiveOnePerClassPerFold) {
  const Dataset ds = labelled({0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, 2);
  const auto folds = stratified_kfold(ds, 5, 3);
  ASSERT_EQ(folds.size(), 5u);
  for (const auto& f : folds) {
    ASSERT_EQ(f.test_indices.size(), 2u);
    EXPECT_NE(ds.labels[f.test_indices[0]], ds.labels[f.test_indices[1]]);
  }
}

TEST(StratifiedKFold, SameSeedSameSplits) {
  std::vector<ClassId> y;
  for (int i = 0; i < 60; ++i) y.push_back(i % 3);
  const Dataset ds = labelled(y, 3);
  const auto a = stratified_kfold(ds, 4, 99);
  const auto b = stratified_kfold(ds, 4, 99);
  for (std::size_t f = 0; f < a.size(); ++f) {
    EXPECT_EQ(a[f].train_indices, b[f].train_indices);
    EXPECT_EQ(a[f].test_indices, b[f].test_indices);
  }
  const auto c = stratified_kfold(ds, 4, 100);
  bool differs = false;
  for (std::size_t f = 0; f < a.size(); ++f) differs = differs || a[f].test_indices != c[f].test_indices;
  EXPECT_TRUE(differs);
}

TEST(StratifiedKFold, UnevenClassesCountingOracle) {
  std::vector<ClassId> y(103, 0);
  y.insert(y.end(), 47, 1);
  const Dataset ds = labelled(y, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto folds = stratified_kfold(ds, 5, seed);
    for (const auto& f : folds) {
      std::size_t a = 0;
      std::size_t b = 0;
      for (std::size_t i : f.test_indices) (ds.labels[i] == 0 ? a : b) += 1;
      EXPECT_TRUE(a == 20 || a == 21) << a;
      EXPECT_TRUE(b == 9 || b == 10) << b;
    }
  }
}

TEST(StratifiedKFold, ClassSmallerThanKNamesTheClass) {
  Dataset ds = labelled({0, 0, 0, 0, 0, 1, 1}, 2);
  ds.class_names = {"common", "rare"};
  try {
    stratified_kfold(ds, 3, 1);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("rare"), std::string::npos);
  }
  EXPECT_THROW(stratified_kfold(ds, 1, 1), InvalidArgument);
}

// Property: random label vectors always partition 0..N-1 and stay within one
// of proportional per class and fold.
TEST(StratifiedKFold, PartitionAndStratificationProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + rng.below(5);
    const int classes = 1 + static_cast<int>(rng.below(4));
    std::vector<ClassId> y;
    for (int c = 0; c < classes; ++c) {
      const std::size_t count = k + rng.below(30);
      y.insert(y.end(), count, c);
    }
    rng.shuffle(std::span<ClassId>(y));
    const Dataset ds = labelled(y, classes);
    const auto folds = stratified_kfold(ds, k, rng.next_u64());
    IndexList all_test;
    for (const auto& f : folds) {
      IndexList merged = f.train_indices;
      merged.insert(merged.end(), f.test_indices.begin(), f.test_indices.end());
      std::sort(merged.begin(), merged.end());
      IndexList expected(ds.size());
      std::iota(expected.begin(), expected.end(), 0);
      ASSERT_EQ(merged, expected);
      EXPECT_TRUE(std::is_sorted(f.train_indices.begin(), f.train_indices.end()));
      all_test.insert(all_test.end(), f.test_indices.begin(), f.test_indices.end());
      const auto counts = ds.class_counts();
      for (int c = 0; c < classes; ++c) {
        const auto in_fold = static_cast<double>(std::count_if(
            f.test_indices.begin(), f.test_indices.end(), [&](std::size_t i) { return ds.labels[i] == c; }));
        const double ideal = static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(k);
        EXPECT_LT(std::abs(in_fold - ideal), 1.0 + 1e-12);
      }
    }
    std::sort(all_test.begin(), all_test.end());
    IndexList expected(ds.size());
    std::iota(expected.begin(), expected.end(), 0);
    EXPECT_EQ(all_test, expected);
  }
}

TEST(StratifiedHoldout, HoldsOutRoughlyTheFraction) {
  std::vector<ClassId> y(100, 0);
  y.insert(y.end(), 20, 1);
  IndexList rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto [kept, held] = stratified_holdout(y, rows, 0.2, 8);
  EXPECT_EQ(kept.size() + held.size(), y.size());
  const auto held_minority = std::count_if(held.begin(), held.end(), [&](std::size_t i) { return y[i] == 1; });
  EXPECT_EQ(held_minority, 4);
  EXPECT_EQ(held.size(), 24u);
}

TEST(Dataset, ValidateCatchesBrokenInvariants) {
  Dataset ds = labelled({0, 1, 1}, 2);
  EXPECT_NO_THROW(ds.validate());
  ds.labels[0] = 2;
  EXPECT_THROW(ds.validate(), DataError);
  ds = labelled({1, 1, 1}, 2);
  EXPECT_THROW(ds.validate(), DataError);  // class 0 never occurs
  ds = labelled({0, 1, 1}, 2);
  ds.features(0, 0) = std::nan("");
  EXPECT_THROW(ds.validate(), DataError);
}

TEST(Dataset, ParsingIsDeterministic) {
  EXPECT_EQ(parse_keel(data("nominal.dat")), parse_keel(data("nominal.dat")));
}

TEST(Shuttle, HasDocumentedShape) {
  const auto path = test::shuttle_path();
  if (!path) GTEST_SKIP() << "shuttle dataset not available (set ASSS_SHUTTLE_PATH)";
  const Dataset ds = parse_keel(*path);
  EXPECT_EQ(ds.size(), 58000u);
  EXPECT_EQ(ds.dim(), 9u);
  EXPECT_EQ(ds.class_count, 7);
}

}  // namespace
}  // namespace asss
