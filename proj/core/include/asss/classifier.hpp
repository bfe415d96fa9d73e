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

// The shared final classifier every subsampling method is judged with.

#ifndef ASSS_CLASSIFIER_HPP_
#define ASSS_CLASSIFIER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "asss/metrics.hpp"
#include "asss/tensor_nn.hpp"
#include "asss/types.hpp"

namespace asss {

struct ClassifierConfig {
  std::vector<std::size_t> hidden{128, 64};  // two hidden layers, three weight layers
  std::size_t epochs = 30;
  std::size_t batch_size = 256;
  double lr = 1e-3;

  void validate() const;
};

/// Plain (unweighted) softmax cross-entropy training with Adam. Identical
/// seeds give identical initialization and batch order.
MlpParams train_classifier(const Matrix& features, std::span<const ClassId> labels, int class_count,
                           const ClassifierConfig& config, std::uint64_t seed);

PredictionSet predict(const MlpParams& model, const Matrix& features, std::vector<ClassId> true_labels);

}  // namespace asss

#endif  // ASSS_CLASSIFIER_HPP_
