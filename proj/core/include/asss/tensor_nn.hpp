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

// Small dense-network engine: MLP forward/backward, weighted softmax
// cross-entropy, Adam and global-norm gradient clipping.

#ifndef ASSS_TENSOR_NN_HPP_
#define ASSS_TENSOR_NN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "asss/types.hpp"

namespace asss {

enum class HiddenActivation { kRelu };

// kLogits: K class logits. kSingleLogit: one raw logit per row (selector).
enum class OutputKind { kLogits, kSingleLogit };

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  RowVector bias;  // fan_out
};

struct MlpParams {
  std::vector<DenseLayer> layers;
  HiddenActivation hidden_activation = HiddenActivation::kRelu;
  OutputKind output_kind = OutputKind::kLogits;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  /// Throws InvalidArgument if layer shapes do not chain, or NumericalError
  /// if a parameter is not finite.
  void validate() const;
};

/// Shape-congruent with the MlpParams it was computed for.
struct GradientSet {
  std::vector<DenseLayer> layers;

  static GradientSet zeros_like(const MlpParams& params);
  double squared_norm() const;
  bool all_finite() const;
};

struct AdamState {
  GradientSet m;
  GradientSet v;
  std::uint64_t step_count = 0;

  static AdamState zeros_like(const MlpParams& params);
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Activations recorded by mlp_forward. inputs[l] is what layer l consumed;
/// pre_activations[l] is inputs[l] * W_l + b_l.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
};

struct ForwardResult {
  Matrix outputs;
  ForwardCache cache;
};

struct BackwardResult {
  GradientSet grads;
  Matrix dinputs;
};

struct XentResult {
  double loss = 0.0;
  Matrix dlogits;
};

/// Glorot-uniform weights in [-sqrt(6/(fan_in+fan_out)), +...], zero biases.
MlpParams init_mlp(std::span<const std::size_t> layer_sizes, std::uint64_t seed,
                   OutputKind output_kind = OutputKind::kLogits);

ForwardResult mlp_forward(const MlpParams& params, const Matrix& inputs);

/// Forward pass without recording a cache.
Matrix mlp_predict(const MlpParams& params, const Matrix& inputs);

BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache, const Matrix& doutputs);

/// loss = -(1/B) sum_i w_i log softmax(logits_i)[y_i] and its exact gradient.
XentResult weighted_softmax_xent(const Matrix& logits, std::span<const ClassId> labels,
                                 std::span<const double> weights);

/// Unweighted per-row cross-entropy -log softmax(logits_i)[y_i].
std::vector<double> per_sample_xent(const Matrix& logits, std::span<const ClassId> labels);

/// Row-wise softmax (max-subtracted).
Matrix softmax_rows(const Matrix& logits);

/// One bias-corrected Adam update, in place. lr = 0 leaves params unchanged
/// (moments still advance).
void adam_step(MlpParams& params, const GradientSet& grads, AdamState& state, double lr,
               const AdamOptions& options = {});

/// Returns the global L2 norm before clipping; rescales grads in place when
/// that norm exceeds max_norm.
double clip_gradients(GradientSet& grads, double max_norm);

// Snapshot format: 8-byte magic "ASSSMLP1", little-endian uint64 header
// length, a JSON header describing the layer shapes, then every weight
// (row-major, fan_in x fan_out) followed by its bias, layer by layer, as
// little-endian IEEE-754 binary64.
void write_snapshot(const MlpParams& params, std::ostream& out);
MlpParams read_snapshot(std::istream& in);
void save_snapshot(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_snapshot(const std::filesystem::path& path);

}  // namespace asss

#endif  // ASSS_TENSOR_NN_HPP_
