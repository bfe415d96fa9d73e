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
#include <vector>

#include <gtest/gtest.h>

#include "asss/error.hpp"
#include "asss/metrics.hpp"
#include "asss/rng.hpp"
#include "oracles.hpp"

namespace asss {
namespace {

PredictionSet labels_only(std::vector<ClassId> truth, std::vector<ClassId> predicted, int k) {
  PredictionSet p;
  p.true_labels = std::move(truth);
  p.predicted_labels = std::move(predicted);
  p.class_scores = Matrix::Zero(static_cast<Eigen::Index>(p.true_labels.size()), k);
  return p;
}

TEST(Accuracy, Examples) {
  EXPECT_EQ(accuracy(labels_only({0, 1, 2}, {0, 1, 2}, 3)), 1.0);
  EXPECT_EQ(accuracy(labels_only({0, 1, 2}, {1, 2, 0}, 3)), 0.0);
  EXPECT_EQ(accuracy(labels_only({0, 1, 1, 0}, {0, 1, 0, 0}, 2)), 0.75);
  EXPECT_THROW(accuracy(labels_only({}, {}, 2)), InvalidArgument);
}

TEST(MacroF, Examples) {
  EXPECT_EQ(macro_f_measure(labels_only({0, 1, 1}, {0, 1, 1}, 2), 2), 1.0);
  // Class 0: P = 1, R = 1/2. Class 1: P = 1/2, R = 1. Both F1 = 2/3.
  EXPECT_NEAR(macro_f_measure(labels_only({0, 0, 1}, {0, 1, 1}, 2), 2), 2.0 / 3.0, 1e-15);
  // Class 2 never occurs: perfect on 0 and 1, macro pulled to 2/3.
  EXPECT_NEAR(macro_f_measure(labels_only({0, 1}, {0, 1}, 3), 3), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(macro_f_measure(labels_only({}, {}, 2), 2), InvalidArgument);
}

TEST(Auc, BinaryExample) {
  const std::vector<double> scores{0.1, 0.4, 0.35, 0.8};
  const std::vector<std::uint8_t> positive{0, 0, 1, 1};
  EXPECT_EQ(binary_auc(scores, positive), 0.75);
}

TEST(Auc, SeparatedAndTied) {
  const std::vector<std::uint8_t> positive{0, 0, 1, 1};
  EXPECT_EQ(binary_auc(std::vector<double>{0.1, 0.2, 0.3, 0.4}, positive), 1.0);
  EXPECT_EQ(binary_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, positive), 0.5);
  EXPECT_THROW(binary_auc(std::vector<double>{0.1, 0.2}, std::vector<std::uint8_t>{1, 1}), InvalidArgument);
}

TEST(Auc, MacroSkipsDegenerateClasses) {
  Matrix s(3, 3);
  s << 0.7, 0.2, 0.1,  //
      0.2, 0.7, 0.1,   //
      0.6, 0.3, 0.1;
  const auto preds = PredictionSet::from_scores({0, 1, 0}, s);
  // Class 2 has no positives and is skipped; classes 0 and 1 separate perfectly.
  EXPECT_EQ(macro_ovr_auc(preds, 3), 1.0);
  const auto single = PredictionSet::from_scores({0, 0, 0}, s);
  EXPECT_THROW(macro_ovr_auc(single, 3), InvalidArgument);
}

TEST(Oracle, ExhaustiveSmallInstances) {
  const auto r = test::exhaustive_metric_check(6, 3);
  EXPECT_GT(r.instances, 1'000'000u);
  EXPECT_EQ(r.f_mismatches, 0u);
  EXPECT_EQ(r.auc_mismatches, 0u);
}

TEST(Oracle, RandomLargerInstances) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const std::size_t n = 5 + rng.below(60);
    std::vector<int> truth(n);
    std::vector<std::vector<double>> rows(n);
    Matrix m(static_cast<Eigen::Index>(n), k);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(rng.below(static_cast<std::size_t>(k)));
      double sum = 0.0;
      rows[i].resize(static_cast<std::size_t>(k));
      for (auto& v : rows[i]) sum += (v = std::round(rng.uniform() * 4.0) + 0.5);
      for (int c = 0; c < k; ++c) m(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)] /= sum;
    }
    const auto preds = PredictionSet::from_scores(std::vector<ClassId>(truth.begin(), truth.end()), m);
    std::vector<int> predicted(preds.predicted_labels.begin(), preds.predicted_labels.end());
    EXPECT_NEAR(macro_f_measure(preds, k), test::brute_macro_f(truth, predicted, k), 1e-15);
    const auto expected = test::brute_macro_auc(truth, rows, k);
    if (expected) {
      EXPECT_NEAR(macro_ovr_auc(preds, k), *expected, 1e-15);
    }
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 30;
    Matrix s(static_cast<Eigen::Index>(n), 3);
    std::vector<ClassId> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<ClassId>(rng.below(3));
      for (int c = 0; c < 3; ++c) s(static_cast<Eigen::Index>(i), c) = rng.uniform();
    }
    Matrix t = s.array().cube().exp().matrix();
    PredictionSet a;
    a.true_labels = y;
    a.predicted_labels = y;
    a.class_scores = s;
    PredictionSet b = a;
    b.class_scores = t;
    EXPECT_EQ(macro_ovr_auc(a, 3), macro_ovr_auc(b, 3));
  }
}

TEST(Metrics, PermutationInvariantAndInRange) {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 40;
    Matrix s(static_cast<Eigen::Index>(n), 4);
    std::vector<ClassId> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<ClassId>(rng.below(4));
      for (int c = 0; c < 4; ++c) s(static_cast<Eigen::Index>(i), c) = rng.uniform();
      s.row(static_cast<Eigen::Index>(i)) /= s.row(static_cast<Eigen::Index>(i)).sum();
    }
    const auto base = evaluate(PredictionSet::from_scores(y, s), 4);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(std::span<std::size_t>(perm));
    Matrix ps(static_cast<Eigen::Index>(n), 4);
    std::vector<ClassId> py(n);
    for (std::size_t i = 0; i < n; ++i) {
      ps.row(static_cast<Eigen::Index>(i)) = s.row(static_cast<Eigen::Index>(perm[i]));
      py[i] = y[perm[i]];
    }
    const auto shuffled = evaluate(PredictionSet::from_scores(py, ps), 4);
    EXPECT_EQ(base.accuracy, shuffled.accuracy);
    EXPECT_NEAR(base.macro_f, shuffled.macro_f, 1e-15);
    EXPECT_NEAR(base.macro_auc, shuffled.macro_auc, 1e-15);
    for (double v : {base.accuracy, base.macro_f, base.macro_auc}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(PredictionSet, ArgmaxTiesGoToLowestClass) {
  Matrix s(2, 3);
  s << 0.4, 0.4, 0.2,  //
      0.2, 0.4, 0.4;
  const auto p = PredictionSet::from_scores({0, 1}, s);
  EXPECT_EQ(p.predicted_labels, (std::vector<ClassId>{0, 1}));
}

TEST(Prr, Examples) {
  const MetricsReport base{0.9, 0.95, 0.99};
  const auto same = prr(base, base);
  EXPECT_EQ(same.accuracy, 1.0);
  EXPECT_EQ(same.macro_f, 1.0);
  EXPECT_EQ(same.macro_auc, 1.0);
  const auto r = prr(MetricsReport{0.9, 0.9, 0.99}, base);
  EXPECT_NEAR(r.macro_f, 0.947, 5e-4);
  const auto above = prr(MetricsReport{0.9, 1.097 * 0.5, 0.99}, MetricsReport{0.9, 0.5, 0.99});
  EXPECT_NEAR(above.macro_f, 1.097, 1e-12);
  EXPECT_THROW(prr(base, MetricsReport{0.9, 0.0, 0.99}), InvalidArgument);
}

}  // namespace
}  // namespace asss
