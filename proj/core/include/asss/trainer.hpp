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

// Adversarial soft-selection trainer.
//
// A selector network maps each training sample to a selection logit s_i,
// p_i = sigmoid(s_i). Each step draws relaxed Bernoulli weights z_i from p_i
// and alternates:
//
//   task update:      theta -= Adam(grad_theta L_C),
//                     L_C = (1/B) sum_i z_i * xent_i(theta)
//   selector update:  phi -= Adam(clip(grad_phi L_G)),
//                     L_G = L_C + lambda * mean(p) - beta * H(p)
//
// where the selector's L_C uses fresh noise and the already-updated theta,
// and H is the mean binary entropy of p over the batch. The selector learning
// rate is kept below the task learning rate. After training, samples are
// ranked by p_i and the top M (or all above a threshold) form the subset.

#ifndef ASSS_TRAINER_HPP_
#define ASSS_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "asss/dataio.hpp"
#include "asss/gumbel.hpp"
#include "asss/rng.hpp"
#include "asss/tensor_nn.hpp"
#include "asss/types.hpp"

namespace asss {

// What the selector network sees for each sample.
enum class SelectorInputs {
  kFeatures,           // x_i only
  kFeaturesAndLabels,  // x_i concatenated with one-hot(y_i)
};

struct AsssConfig {
  double lambda_sparsity = 0.1;
  double beta_entropy = 0.01;
  TemperatureSchedule schedule{1.0, 0.1, 0};  // total_steps is derived from total_iters
  std::size_t total_iters = 0;
  std::size_t batch_size = 256;
  double lr_task = 1e-3;
  double lr_selector = 1e-4;
  double clip_norm = 5.0;
  double baseline_decay = 0.99;
  std::vector<std::size_t> selector_hidden{64, 64};
  std::vector<std::size_t> task_hidden{128, 64};
  SelectorInputs selector_inputs = SelectorInputs::kFeaturesAndLabels;
  std::size_t log_interval = 1;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument. Requires lr_selector < lr_task unless both are
  /// zero (a frozen run).
  void validate() const;

  /// Temperature used on step `iter` (0-based): tau_init on the first step,
  /// tau_final on the last.
  double temperature_at(std::size_t iter) const;
};

struct TrainerState {
  MlpParams selector;
  MlpParams task;
  AdamState selector_adam;
  AdamState task_adam;
  double loss_baseline = 0.0;
  std::size_t iter = 0;
  double tau = 1.0;
  Rng rng{0};
};

struct TraceRecord {
  std::size_t iter = 0;
  double task_loss = 0.0;
  double selector_loss = 0.0;
  double mean_p = 0.0;
  double entropy = 0.0;
  double tau = 0.0;
};

struct SelectorOutput {
  std::vector<double> logits;
  std::vector<double> p;  // clamped sigmoid(logits)
  ForwardCache cache;
};

struct SelectorLoss {
  double value = 0.0;
  double entropy = 0.0;
  // d(lambda*mean(p) - beta*H(p)) / dp_i.
  std::vector<double> dloss_dp;
  // Coefficient of the task-loss pathway (always 1: L_G = L_C + ...).
  double dloss_dtask = 1.0;
};

/// One set of Gumbel pairs per batch row, plus the batch itself. Everything
/// needed to evaluate the selector objective deterministically.
struct SelectorBatch {
  Matrix selector_inputs;
  Matrix features;
  std::span<const ClassId> labels;
  std::span<const std::pair<double, double>> noise;
};

struct SelectorObjective {
  double task_loss = 0.0;  // L_C under the supplied noise
  SelectorLoss loss;       // L_G pieces; loss.value includes the baseline shift
  std::vector<double> p;
  GradientSet grad;        // d L_G / d phi, unclipped
};

/// Builds selector inputs for a batch: features, optionally with one-hot labels.
Matrix make_selector_inputs(const Matrix& features, std::span<const ClassId> labels, int class_count,
                            SelectorInputs mode);

SelectorOutput selector_forward(const MlpParams& selector, const Matrix& selector_inputs);

/// (task_loss - baseline) + lambda * mean(p) - beta * H(p).
SelectorLoss selector_loss(double task_loss, std::span<const double> p, double lambda_sparsity,
                           double beta_entropy, double baseline);

/// L_G and its exact gradient w.r.t. the selector parameters, for a fixed
/// task network, batch, noise and temperature.
SelectorObjective evaluate_selector_objective(const MlpParams& selector, const MlpParams& task,
                                              const SelectorBatch& batch, double tau,
                                              const AsssConfig& config, double baseline);

TrainerState init_trainer(std::size_t feature_dim, int class_count, const AsssConfig& config);

/// Optional introspection of one train_step.
struct StepDiagnostics {
  MlpParams selector_before;
  MlpParams task_after;  // theta after the task update
  std::vector<std::pair<double, double>> selector_noise;
  double tau = 0.0;
  double baseline_before = 0.0;
  GradientSet selector_grad;  // before clipping
  double selector_grad_norm = 0.0;
};

TraceRecord train_step(TrainerState& state, const Matrix& batch_features, std::span<const ClassId> batch_labels,
                       int class_count, const AsssConfig& config, StepDiagnostics* diagnostics = nullptr);

struct AsssResult {
  MlpParams selector;
  MlpParams task;
  std::vector<TraceRecord> trace;
};

/// Runs config.total_iters steps over epoch-wise reshuffled mini-batches.
AsssResult train_asss(const Dataset& train, const AsssConfig& config);

/// Steps for `epochs` passes over n rows with the given batch size.
std::size_t iterations_for_epochs(std::size_t n, std::size_t batch_size, std::size_t epochs);

struct TopM {
  std::size_t m = 0;
};
struct ScoreThreshold {
  double k = 0.5;
};
using RetrievalMode = std::variant<TopM, ScoreThreshold>;

struct SelectionResult {
  std::vector<double> scores;  // p*_i for every row
  IndexList chosen;            // sorted ascending
  std::optional<std::size_t> budget;
  std::optional<double> threshold;
};

/// Indices of the m largest scores; ties go to the lower index. Returned
/// sorted ascending.
IndexList top_m_indices(std::span<const double> scores, std::size_t m);

/// Indices with score strictly above k, ascending. Throws if none qualify.
IndexList indices_above(std::span<const double> scores, double k);

SelectionResult retrieve_subset(const MlpParams& selector, const Dataset& dataset, const RetrievalMode& mode,
                                SelectorInputs inputs);

void write_trace_csv(std::span<const TraceRecord> trace, std::ostream& out);

}  // namespace asss

#endif  // ASSS_TRAINER_HPP_
