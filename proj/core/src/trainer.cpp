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

#include "asss/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "asss/error.hpp"

namespace asss {

namespace {

std::vector<std::size_t> layer_sizes(std::size_t input, std::span<const std::size_t> hidden, std::size_t output) {
  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

Matrix gather_rows(const Matrix& source, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = source.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

void AsssConfig::validate() const {
  if (!(lambda_sparsity >= 0.0)) throw InvalidArgument("lambda_sparsity must be >= 0");
  if (!(beta_entropy >= 0.0)) throw InvalidArgument("beta_entropy must be >= 0");
  schedule.validate();
  if (batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  if (!(lr_task >= 0.0) || !(lr_selector >= 0.0)) throw InvalidArgument("learning rates must be >= 0");
  const bool frozen = lr_task == 0.0 && lr_selector == 0.0;
  if (!frozen && !(lr_selector < lr_task)) {
    throw InvalidArgument(fmt::format("two-time-scale rule requires lr_selector ({}) < lr_task ({})",
                                      lr_selector, lr_task));
  }
  if (!(clip_norm > 0.0)) throw InvalidArgument("clip_norm must be positive");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw InvalidArgument("baseline_decay must lie in [0, 1)");
  if (log_interval == 0) throw InvalidArgument("log_interval must be >= 1");
  for (std::size_t w : selector_hidden) {
    if (w == 0) throw InvalidArgument("selector hidden widths must be positive");
  }
  for (std::size_t w : task_hidden) {
    if (w == 0) throw InvalidArgument("task hidden widths must be positive");
  }
}

double AsssConfig::temperature_at(std::size_t iter) const {
  TemperatureSchedule s = schedule;
  s.total_steps = total_iters > 0 ? total_iters - 1 : 0;
  return anneal_temperature(std::min(iter, s.total_steps), s);
}

Matrix make_selector_inputs(const Matrix& features, std::span<const ClassId> labels, int class_count,
                            SelectorInputs mode) {
  if (mode == SelectorInputs::kFeatures) return features;
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InvalidArgument("make_selector_inputs: feature rows and labels disagree");
  }
  Matrix out = Matrix::Zero(features.rows(), features.cols() + class_count);
  out.leftCols(features.cols()) = features;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) throw InvalidArgument("make_selector_inputs: bad label");
    out(static_cast<Eigen::Index>(i), features.cols() + labels[i]) = 1.0;
  }
  return out;
}

SelectorOutput selector_forward(const MlpParams& selector, const Matrix& selector_inputs) {
  if (selector.output_dim() != 1) throw InvalidArgument("selector network must emit a single logit");
  auto forward = mlp_forward(selector, selector_inputs);
  SelectorOutput out;
  out.logits.resize(static_cast<std::size_t>(forward.outputs.rows()));
  out.p.resize(out.logits.size());
  for (std::size_t i = 0; i < out.logits.size(); ++i) {
    out.logits[i] = forward.outputs(static_cast<Eigen::Index>(i), 0);
    out.p[i] = clamp_probability(sigmoid(out.logits[i]));
  }
  out.cache = std::move(forward.cache);
  return out;
}

SelectorLoss selector_loss(double task_loss, std::span<const double> p, double lambda_sparsity,
                           double beta_entropy, double baseline) {
  if (p.empty()) throw InvalidArgument("selector_loss: empty batch");
  if (lambda_sparsity < 0.0 || beta_entropy < 0.0) throw InvalidArgument("selector_loss: negative weight");
  const double inv_batch = 1.0 / static_cast<double>(p.size());
  SelectorLoss out;
  out.dloss_dp.resize(p.size());
  double mean_p = 0.0;
  double entropy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (!(pi > 0.0 && pi < 1.0)) throw InvalidArgument(fmt::format("selector_loss: p = {} outside (0, 1)", pi));
    mean_p += pi;
    entropy += binary_entropy(pi);
    // dH/dp = log((1 - p) / p)
    out.dloss_dp[i] = inv_batch * (lambda_sparsity - beta_entropy * (std::log1p(-pi) - std::log(pi)));
  }
  mean_p *= inv_batch;
  out.entropy = entropy * inv_batch;
  out.value = (task_loss - baseline) + lambda_sparsity * mean_p - beta_entropy * out.entropy;
  return out;
}

SelectorObjective evaluate_selector_objective(const MlpParams& selector, const MlpParams& task,
                                              const SelectorBatch& batch, double tau,
                                              const AsssConfig& config, double baseline) {
  const auto rows = static_cast<std::size_t>(batch.features.rows());
  if (rows == 0 || batch.labels.size() != rows || batch.noise.size() != rows ||
      static_cast<std::size_t>(batch.selector_inputs.rows()) != rows) {
    throw InvalidArgument("evaluate_selector_objective: inconsistent batch");
  }
  auto sel = selector_forward(selector, batch.selector_inputs);
  const auto mask = relax_batch(sel.p, tau, batch.noise);
  const auto xent = per_sample_xent(mlp_predict(task, batch.features), batch.labels);

  const double inv_batch = 1.0 / static_cast<double>(rows);
  double task_loss = 0.0;
  for (std::size_t i = 0; i < rows; ++i) task_loss += mask.z_tilde[i] * xent[i];
  task_loss *= inv_batch;

  SelectorObjective out;
  out.task_loss = task_loss;
  out.loss = selector_loss(task_loss, sel.p, config.lambda_sparsity, config.beta_entropy, baseline);

  // dL_G/ds_i = (xent_i / B) dz_i/ds_i + dR/dp_i * p_i (1 - p_i)
  Matrix dlogits(static_cast<Eigen::Index>(rows), 1);
  for (std::size_t i = 0; i < rows; ++i) {
    const double pi = sel.p[i];
    dlogits(static_cast<Eigen::Index>(i), 0) =
        out.loss.dloss_dtask * xent[i] * inv_batch * mask.dz_dlogit[i] + out.loss.dloss_dp[i] * pi * (1.0 - pi);
  }
  out.grad = mlp_backward(selector, sel.cache, dlogits).grads;
  out.p = std::move(sel.p);
  return out;
}

TrainerState init_trainer(std::size_t feature_dim, int class_count, const AsssConfig& config) {
  config.validate();
  if (feature_dim == 0 || class_count < 1) throw InvalidArgument("init_trainer: empty feature space");
  const std::size_t selector_in =
      feature_dim + (config.selector_inputs == SelectorInputs::kFeaturesAndLabels ? static_cast<std::size_t>(class_count) : 0);
  TrainerState state;
  state.selector = init_mlp(layer_sizes(selector_in, config.selector_hidden, 1), derive_seed(config.seed, "selector"),
                            OutputKind::kSingleLogit);
  state.task = init_mlp(layer_sizes(feature_dim, config.task_hidden, static_cast<std::size_t>(class_count)),
                        derive_seed(config.seed, "task"));
  state.selector_adam = AdamState::zeros_like(state.selector);
  state.task_adam = AdamState::zeros_like(state.task);
  state.tau = config.temperature_at(0);
  state.rng = Rng(derive_seed(config.seed, "gumbel"));
  return state;
}

TraceRecord train_step(TrainerState& state, const Matrix& batch_features, std::span<const ClassId> batch_labels,
                       int class_count, const AsssConfig& config, StepDiagnostics* diagnostics) {
  const auto rows = static_cast<std::size_t>(batch_features.rows());
  if (rows == 0 || batch_labels.size() != rows) throw InvalidArgument("train_step: empty or inconsistent batch");
  if (config.total_iters > 0 && state.iter >= config.total_iters) {
    throw InvalidArgument("train_step: iteration budget exhausted");
  }
  const double tau = state.tau;
  const Matrix selector_inputs =
      make_selector_inputs(batch_features, batch_labels, class_count, config.selector_inputs);

  // Task update on relaxed weights drawn from the current selector.
  const auto sel = selector_forward(state.selector, selector_inputs);
  const auto task_noise = draw_gumbel_pairs(rows, state.rng);
  const auto mask = relax_batch(sel.p, tau, task_noise);
  auto task_forward = mlp_forward(state.task, batch_features);
  const auto xent = weighted_softmax_xent(task_forward.outputs, batch_labels, mask.z_tilde);
  const auto task_grads = mlp_backward(state.task, task_forward.cache, xent.dlogits).grads;
  adam_step(state.task, task_grads, state.task_adam, config.lr_task);

  // Selector update against the updated task network with fresh noise.
  const auto selector_noise = draw_gumbel_pairs(rows, state.rng);
  const SelectorBatch batch{selector_inputs, batch_features, batch_labels, selector_noise};
  auto objective = evaluate_selector_objective(state.selector, state.task, batch, tau, config, state.loss_baseline);
  if (!std::isfinite(xent.loss) || !std::isfinite(objective.loss.value) || !objective.grad.all_finite()) {
    throw NumericalError(fmt::format("non-finite loss at iteration {}: task_loss={} selector_loss={} tau={}",
                                     state.iter, xent.loss, objective.loss.value, tau));
  }
  if (diagnostics != nullptr) {
    diagnostics->selector_before = state.selector;
    diagnostics->task_after = state.task;
    diagnostics->selector_noise = selector_noise;
    diagnostics->tau = tau;
    diagnostics->baseline_before = state.loss_baseline;
    diagnostics->selector_grad = objective.grad;
  }
  const double grad_norm = clip_gradients(objective.grad, config.clip_norm);
  if (diagnostics != nullptr) diagnostics->selector_grad_norm = grad_norm;
  adam_step(state.selector, objective.grad, state.selector_adam, config.lr_selector);

  state.loss_baseline = config.baseline_decay * state.loss_baseline + (1.0 - config.baseline_decay) * objective.task_loss;

  TraceRecord record;
  record.iter = state.iter;
  record.task_loss = xent.loss;
  record.selector_loss = objective.loss.value;
  record.mean_p = std::accumulate(objective.p.begin(), objective.p.end(), 0.0) / static_cast<double>(rows);
  record.entropy = objective.loss.entropy;
  record.tau = tau;

  ++state.iter;
  state.tau = config.temperature_at(state.iter);
  return record;
}

std::size_t iterations_for_epochs(std::size_t n, std::size_t batch_size, std::size_t epochs) {
  if (batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  return epochs * ((n + batch_size - 1) / batch_size);
}

AsssResult train_asss(const Dataset& train, const AsssConfig& config) {
  config.validate();
  train.validate();
  auto state = init_trainer(train.dim(), train.class_count, config);
  AsssResult result;
  result.trace.reserve(config.total_iters / config.log_interval + 1);

  Rng batch_rng(derive_seed(config.seed, "batches"));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = 0;
  std::vector<ClassId> batch_labels;
  for (std::size_t t = 0; t < config.total_iters; ++t) {
    if (cursor == 0) batch_rng.shuffle(std::span<std::size_t>(order));
    const std::size_t end = std::min(cursor + config.batch_size, order.size());
    const std::span<const std::size_t> rows(order.data() + cursor, end - cursor);
    const Matrix batch = gather_rows(train.features, rows);
    batch_labels.clear();
    for (std::size_t r : rows) batch_labels.push_back(train.labels[r]);
    cursor = end == order.size() ? 0 : end;

    auto record = train_step(state, batch, batch_labels, train.class_count, config);
    if (t % config.log_interval == 0 || t + 1 == config.total_iters) result.trace.push_back(record);
  }
  result.selector = std::move(state.selector);
  result.task = std::move(state.task);
  return result;
}

IndexList top_m_indices(std::span<const double> scores, std::size_t m) {
  if (m > scores.size()) {
    throw InvalidArgument(fmt::format("top-M budget {} exceeds {} samples", m, scores.size()));
  }
  IndexList order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(), better);
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

IndexList indices_above(std::span<const double> scores, double k) {
  if (!(k > 0.0 && k < 1.0)) throw InvalidArgument("threshold k must lie in (0, 1)");
  IndexList chosen;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > k) chosen.push_back(i);
  }
  if (chosen.empty()) throw InvalidArgument(fmt::format("no sample scores above threshold {}", k));
  return chosen;
}

SelectionResult retrieve_subset(const MlpParams& selector, const Dataset& dataset, const RetrievalMode& mode,
                                SelectorInputs inputs) {
  const Matrix selector_inputs = make_selector_inputs(dataset.features, dataset.labels, dataset.class_count, inputs);
  const Matrix logits = mlp_predict(selector, selector_inputs);
  if (logits.cols() != 1) throw InvalidArgument("selector network must emit a single logit");
  if (!logits.allFinite()) throw NumericalError("selector produced non-finite logits");
  const std::span<const double> raw(logits.data(), static_cast<std::size_t>(logits.rows()));

  SelectionResult result;
  result.scores.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) result.scores[i] = clamp_probability(sigmoid(raw[i]));

  if (const auto* top = std::get_if<TopM>(&mode)) {
    // Rank on the logit: same order as sigmoid, but unaffected by saturation.
    result.chosen = top_m_indices(raw, top->m);
    result.budget = top->m;
  } else {
    const double k = std::get<ScoreThreshold>(mode).k;
    result.chosen = indices_above(result.scores, k);
    result.threshold = k;
  }
  return result;
}

void write_trace_csv(std::span<const TraceRecord> trace, std::ostream& out) {
  out << "iter,task_loss,selector_loss,mean_p,entropy,tau\n";
  for (const auto& r : trace) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.iter, r.task_loss, r.selector_loss,
                       r.mean_p, r.entropy, r.tau);
  }
}

}  // namespace asss
