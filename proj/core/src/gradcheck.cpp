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

#include "asss/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "asss/error.hpp"
#include "asss/gumbel.hpp"
#include "asss/rng.hpp"
#include "asss/trainer.hpp"

namespace asss {
namespace {

constexpr double kNetworkTolerance = 1e-4;
constexpr double kObjectiveTolerance = 1e-3;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

std::vector<ClassId> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<ClassId> y(n);
  for (auto& v : y) v = static_cast<ClassId>(rng.below(static_cast<std::size_t>(k)));
  return y;
}

std::vector<double> random_weights(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  for (auto& v : w) v = 0.05 + 0.9 * rng.uniform();
  return w;
}

// Small random biases move ReLU kinks away from exact zeros.
void jitter_biases(MlpParams& params, Rng& rng) {
  for (auto& layer : params.layers) {
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) layer.bias(j) = 0.1 * rng.normal();
  }
}

}  // namespace

double relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult compare_with_finite_differences(std::string name, MlpParams& params, const GradientSet& analytic,
                                                const std::function<double()>& loss, double tolerance,
                                                double step) {
  if (analytic.layers.size() != params.layers.size()) {
    throw InvalidArgument("compare_with_finite_differences: gradient shape mismatch");
  }
  GradCheckResult result;
  result.name = std::move(name);
  result.tolerance = tolerance;
  auto probe = [&](double& slot, double expected) {
    const double saved = slot;
    slot = saved + step;
    const double up = loss();
    slot = saved - step;
    const double down = loss();
    slot = saved;
    const double numeric = (up - down) / (2.0 * step);
    result.max_relative_error = std::max(result.max_relative_error, relative_error(expected, numeric));
    ++result.partials;
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const auto& grad = analytic.layers[l];
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) probe(layer.weight(i, j), grad.weight(i, j));
    }
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) probe(layer.bias(j), grad.bias(j));
  }
  result.passed = result.max_relative_error <= tolerance;
  return result;
}

GradCheckResult check_task_network(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "gradcheck-task"));
  const std::size_t sizes[] = {4, 8, 6, 3};  // 40 + 54 + 21 = 115 parameters
  MlpParams net = init_mlp(sizes, derive_seed(seed, "gradcheck-task-init"));
  jitter_biases(net, rng);
  const Matrix x = random_matrix(12, 4, rng);
  const auto y = random_labels(12, 3, rng);
  const auto w = random_weights(12, rng);

  auto forward = mlp_forward(net, x);
  const auto xent = weighted_softmax_xent(forward.outputs, y, w);
  const auto grads = mlp_backward(net, forward.cache, xent.dlogits).grads;
  return compare_with_finite_differences(
      "task network parameters", net, grads,
      [&] { return weighted_softmax_xent(mlp_predict(net, x), y, w).loss; }, kNetworkTolerance);
}

GradCheckResult check_input_gradients(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "gradcheck-input"));
  const std::size_t sizes[] = {5, 7, 3};
  MlpParams net = init_mlp(sizes, derive_seed(seed, "gradcheck-input-init"));
  jitter_biases(net, rng);
  Matrix x = random_matrix(6, 5, rng);
  const auto y = random_labels(6, 3, rng);
  const auto w = random_weights(6, rng);

  auto forward = mlp_forward(net, x);
  const auto xent = weighted_softmax_xent(forward.outputs, y, w);
  const Matrix dinputs = mlp_backward(net, forward.cache, xent.dlogits).dinputs;

  GradCheckResult result;
  result.name = "task network inputs";
  result.tolerance = kNetworkTolerance;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double saved = x(i, j);
      x(i, j) = saved + kFiniteDifferenceStep;
      const double up = weighted_softmax_xent(mlp_predict(net, x), y, w).loss;
      x(i, j) = saved - kFiniteDifferenceStep;
      const double down = weighted_softmax_xent(mlp_predict(net, x), y, w).loss;
      x(i, j) = saved;
      const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
      result.max_relative_error = std::max(result.max_relative_error, relative_error(dinputs(i, j), numeric));
      ++result.partials;
    }
  }
  result.passed = result.max_relative_error <= result.tolerance;
  return result;
}

GradCheckResult check_selector_objective(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "gradcheck-selector"));
  constexpr int kClasses = 2;
  constexpr Eigen::Index kRows = 10;
  AsssConfig config;
  config.lambda_sparsity = 0.1;
  config.beta_entropy = 0.01;
  config.selector_inputs = SelectorInputs::kFeaturesAndLabels;

  const Matrix x = random_matrix(kRows, 3, rng);
  const auto y = random_labels(static_cast<std::size_t>(kRows), kClasses, rng);
  const std::size_t selector_sizes[] = {3 + kClasses, 8, 8, 1};  // 48 + 72 + 9 = 129 parameters
  MlpParams selector = init_mlp(selector_sizes, derive_seed(seed, "gradcheck-selector-init"), OutputKind::kSingleLogit);
  jitter_biases(selector, rng);
  const std::size_t task_sizes[] = {3, 6, kClasses};
  const MlpParams task = init_mlp(task_sizes, derive_seed(seed, "gradcheck-selector-task"));
  const auto noise = draw_gumbel_pairs(static_cast<std::size_t>(kRows), rng);

  SelectorBatch batch;
  batch.selector_inputs = make_selector_inputs(x, y, kClasses, config.selector_inputs);
  batch.features = x;
  batch.labels = y;
  batch.noise = noise;
  constexpr double kTau = 0.7;
  constexpr double kBaseline = 0.25;

  const auto objective = evaluate_selector_objective(selector, task, batch, kTau, config, kBaseline);
  return compare_with_finite_differences(
      "selector objective", selector, objective.grad,
      [&] { return evaluate_selector_objective(selector, task, batch, kTau, config, kBaseline).loss.value; },
      kObjectiveTolerance);
}

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed) {
  return {check_task_network(seed), check_input_gradients(seed), check_selector_objective(seed)};
}

}  // namespace asss
