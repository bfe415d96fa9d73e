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

#ifndef ASSS_METRICS_HPP_
#define ASSS_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "asss/types.hpp"

namespace asss {

struct PredictionSet {
  std::vector<ClassId> true_labels;
  std::vector<ClassId> predicted_labels;
  Matrix class_scores;  // n x K, rows are probability vectors

  /// predicted_labels = row argmax of scores (ties to the lowest class id).
  static PredictionSet from_scores(std::vector<ClassId> true_labels, Matrix class_scores);

  std::size_t size() const { return true_labels.size(); }
};

struct MetricsReport {
  double accuracy = 0.0;
  double macro_f = 0.0;
  double macro_auc = 0.0;
};

struct PrrReport {
  double accuracy = 0.0;
  double macro_f = 0.0;
  double macro_auc = 0.0;
};

double accuracy(const PredictionSet& preds);

/// Unweighted mean over all K classes of per-class F1. A class with no
/// predicted or no true members (or P + R = 0) contributes 0.
double macro_f_measure(const PredictionSet& preds, int class_count);

/// Mann-Whitney AUC: (concordant + 0.5 * tied) / (pos * neg). Requires at
/// least one positive and one negative.
double binary_auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

/// Mean one-vs-rest AUC over classes that have both positives and negatives.
double macro_ovr_auc(const PredictionSet& preds, int class_count);

MetricsReport evaluate(const PredictionSet& preds, int class_count);

/// Element-wise method / baseline. Throws when a baseline value is not > 0.
PrrReport prr(const MetricsReport& method, const MetricsReport& baseline);

}  // namespace asss

#endif  // ASSS_METRICS_HPP_
