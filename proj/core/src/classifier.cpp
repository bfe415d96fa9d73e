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

#include "asss/classifier.hpp"

#include <algorithm>
#include <numeric>

#include "asss/error.hpp"
#include "asss/rng.hpp"

namespace asss {

void ClassifierConfig::validate() const {
  if (epochs == 0 || batch_size == 0) throw InvalidArgument("classifier epochs and batch_size must be >= 1");
  if (!(lr > 0.0)) throw InvalidArgument("classifier learning rate must be positive");
  for (std::size_t w : hidden) {
    if (w == 0) throw InvalidArgument("classifier hidden widths must be positive");
  }
}

MlpParams train_classifier(const Matrix& features, std::span<const ClassId> labels, int class_count,
                           const ClassifierConfig& config, std::uint64_t seed) {
  config.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0 || labels.size() != n) throw InvalidArgument("train_classifier: empty or inconsistent training set");
  std::vector<std::size_t> sizes{static_cast<std::size_t>(features.cols())};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(static_cast<std::size_t>(class_count));
  MlpParams model = init_mlp(sizes, derive_seed(seed, "classifier-init"));
  AdamState adam = AdamState::zeros_like(model);

  Rng rng(derive_seed(seed, "classifier-batches"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Matrix batch;
  std::vector<ClassId> batch_labels;
  std::vector<double> ones;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, n);
      const auto rows = static_cast<Eigen::Index>(end - start);
      batch.resize(rows, features.cols());
      batch_labels.resize(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.row(static_cast<Eigen::Index>(i - start)) = features.row(static_cast<Eigen::Index>(order[i]));
        batch_labels[i - start] = labels[order[i]];
      }
      ones.assign(end - start, 1.0);
      auto forward = mlp_forward(model, batch);
      const auto xent = weighted_softmax_xent(forward.outputs, batch_labels, ones);
      const auto grads = mlp_backward(model, forward.cache, xent.dlogits).grads;
      adam_step(model, grads, adam, config.lr);
    }
  }
  return model;
}

PredictionSet predict(const MlpParams& model, const Matrix& features, std::vector<ClassId> true_labels) {
  const Matrix logits = mlp_predict(model, features);
  if (!logits.allFinite()) throw NumericalError("classifier produced non-finite logits");
  return PredictionSet::from_scores(std::move(true_labels), softmax_rows(logits));
}

}  // namespace asss
