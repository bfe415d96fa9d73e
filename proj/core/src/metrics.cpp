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

#include "asss/metrics.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "asss/error.hpp"

namespace asss {

namespace {

void check_labels(const PredictionSet& preds, int class_count) {
  if (preds.true_labels.empty()) throw InvalidArgument("metrics: empty prediction set");
  if (preds.predicted_labels.size() != preds.true_labels.size()) {
    throw InvalidArgument("metrics: true and predicted label counts differ");
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (ClassId y : {preds.true_labels[i], preds.predicted_labels[i]}) {
      if (y < 0 || y >= class_count) throw InvalidArgument(fmt::format("metrics: label {} out of range", y));
    }
  }
}

}  // namespace

PredictionSet PredictionSet::from_scores(std::vector<ClassId> true_labels, Matrix class_scores) {
  if (static_cast<std::size_t>(class_scores.rows()) != true_labels.size()) {
    throw InvalidArgument("PredictionSet: score rows and labels differ");
  }
  PredictionSet preds;
  preds.predicted_labels.resize(true_labels.size());
  for (Eigen::Index i = 0; i < class_scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < class_scores.cols(); ++k) {
      if (class_scores(i, k) > class_scores(i, best)) best = k;
    }
    preds.predicted_labels[static_cast<std::size_t>(i)] = static_cast<ClassId>(best);
  }
  preds.true_labels = std::move(true_labels);
  preds.class_scores = std::move(class_scores);
  return preds;
}

double accuracy(const PredictionSet& preds) {
  if (preds.true_labels.empty()) throw InvalidArgument("accuracy: empty prediction set");
  if (preds.predicted_labels.size() != preds.true_labels.size()) {
    throw InvalidArgument("accuracy: true and predicted label counts differ");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds.true_labels[i] == preds.predicted_labels[i];
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double macro_f_measure(const PredictionSet& preds, int class_count) {
  check_labels(preds, class_count);
  const auto k = static_cast<std::size_t>(class_count);
  std::vector<std::size_t> tp(k, 0), fp(k, 0), fn(k, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto t = static_cast<std::size_t>(preds.true_labels[i]);
    const auto p = static_cast<std::size_t>(preds.predicted_labels[i]);
    if (t == p) {
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (tp[c] + fp[c] == 0 || tp[c] + fn[c] == 0) continue;
    const double precision = static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]);
    const double recall = static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]);
    if (precision + recall == 0.0) continue;
    total += 2.0 * precision * recall / (precision + recall);
  }
  return total / static_cast<double>(k);
}

double binary_auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw InvalidArgument("binary_auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of mid-ranks of the positives; tied groups share their average rank.
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    const double mid_rank = 0.5 * static_cast<double>(start + end + 1);  // 1-based average of start+1..end
    for (std::size_t j = start; j < end; ++j) {
      if (positive[order[j]]) {
        positive_rank_sum += mid_rank;
        ++n_pos;
      }
    }
    start = end;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InvalidArgument("binary_auc: need at least one positive and one negative");
  const double pos = static_cast<double>(n_pos);
  const double u = positive_rank_sum - pos * (pos + 1.0) / 2.0;
  return u / (pos * static_cast<double>(n_neg));
}

double macro_ovr_auc(const PredictionSet& preds, int class_count) {
  check_labels(preds, class_count);
  if (preds.class_scores.rows() != static_cast<Eigen::Index>(preds.size()) ||
      preds.class_scores.cols() != class_count) {
    throw InvalidArgument("macro_ovr_auc: score matrix must be n x K");
  }
  double total = 0.0;
  int used = 0;
  std::vector<double> column(preds.size());
  std::vector<std::uint8_t> positive_flags(preds.size());
  for (int c = 0; c < class_count; ++c) {
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      positive_flags[i] = preds.true_labels[i] == c ? 1 : 0;
      n_pos += positive_flags[i];
      column[i] = preds.class_scores(static_cast<Eigen::Index>(i), c);
    }
    if (n_pos == 0 || n_pos == preds.size()) continue;
    total += binary_auc(column, positive_flags);
    ++used;
  }
  if (used == 0) throw InvalidArgument("macro_ovr_auc: no class has both positives and negatives");
  return total / static_cast<double>(used);
}

MetricsReport evaluate(const PredictionSet& preds, int class_count) {
  return {accuracy(preds), macro_f_measure(preds, class_count), macro_ovr_auc(preds, class_count)};
}

PrrReport prr(const MetricsReport& method, const MetricsReport& baseline) {
  auto ratio = [](double value, double base, const char* name) {
    if (!(base > 0.0)) throw InvalidArgument(fmt::format("PRR undefined: baseline {} is {}", name, base));
    return value / base;
  };
  return {ratio(method.accuracy, baseline.accuracy, "accuracy"), ratio(method.macro_f, baseline.macro_f, "macro_f"),
          ratio(method.macro_auc, baseline.macro_auc, "macro_auc")};
}

}  // namespace asss
