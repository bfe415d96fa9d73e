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

#include "asss/tensor_nn.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "asss/error.hpp"
#include "asss/rng.hpp"

namespace asss {

namespace {

void check_congruent(const MlpParams& params, const GradientSet& grads, const char* what) {
  if (params.layers.size() != grads.layers.size()) {
    throw InvalidArgument(fmt::format("{}: layer count mismatch", what));
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    if (p.weight.rows() != g.weight.rows() || p.weight.cols() != g.weight.cols() ||
        p.bias.size() != g.bias.size()) {
      throw InvalidArgument(fmt::format("{}: shape mismatch at layer {}", what, l));
    }
  }
}

void write_u64_le(std::ostream& out, std::uint64_t value) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw DataError("snapshot truncated");
  std::uint64_t value = 0;
  for (int i = 7; i >= 0; --i) value = (value << 8) | bytes[static_cast<std::size_t>(i)];
  return value;
}

constexpr char kSnapshotMagic[8] = {'A', 'S', 'S', 'S', 'M', 'L', 'P', '1'};

}  // namespace

std::size_t MlpParams::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.rows());
}

std::size_t MlpParams::output_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.cols());
}

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers) count += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return count;
}

void MlpParams::validate() const {
  if (layers.empty()) throw InvalidArgument("MLP has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.weight.cols()) {
      throw InvalidArgument(fmt::format("layer {} bias length does not match fan_out", l));
    }
    if (l + 1 < layers.size() && layer.weight.cols() != layers[l + 1].weight.rows()) {
      throw InvalidArgument(fmt::format("layer {} fan_out does not match layer {} fan_in", l, l + 1));
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw NumericalError(fmt::format("layer {} has non-finite parameters", l));
    }
  }
  if (output_kind == OutputKind::kSingleLogit && output_dim() != 1) {
    throw InvalidArgument("single-logit network must have exactly one output");
  }
}

GradientSet GradientSet::zeros_like(const MlpParams& params) {
  GradientSet grads;
  grads.layers.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    grads.layers.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                            RowVector::Zero(layer.bias.size())});
  }
  return grads;
}

double GradientSet::squared_norm() const {
  double total = 0.0;
  for (const auto& layer : layers) total += layer.weight.squaredNorm() + layer.bias.squaredNorm();
  return total;
}

bool GradientSet::all_finite() const {
  for (const auto& layer : layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

AdamState AdamState::zeros_like(const MlpParams& params) {
  return {GradientSet::zeros_like(params), GradientSet::zeros_like(params), 0};
}

MlpParams init_mlp(std::span<const std::size_t> layer_sizes, std::uint64_t seed, OutputKind output_kind) {
  if (layer_sizes.size() < 2) throw InvalidArgument("init_mlp: need at least two layer sizes");
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw InvalidArgument("init_mlp: layer sizes must be positive");
  }
  Rng rng(seed);
  MlpParams params;
  params.output_kind = output_kind;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(layer_sizes[l]);
    const auto fan_out = static_cast<Eigen::Index>(layer_sizes[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer{Matrix(fan_in, fan_out), RowVector::Zero(fan_out)};
    for (Eigen::Index i = 0; i < fan_in; ++i) {
      for (Eigen::Index j = 0; j < fan_out; ++j) layer.weight(i, j) = limit * (2.0 * rng.uniform() - 1.0);
    }
    params.layers.push_back(std::move(layer));
  }
  params.validate();
  return params;
}

ForwardResult mlp_forward(const MlpParams& params, const Matrix& inputs) {
  if (params.layers.empty()) throw InvalidArgument("mlp_forward: empty network");
  if (static_cast<std::size_t>(inputs.cols()) != params.input_dim()) {
    throw InvalidArgument(fmt::format("mlp_forward: input width {} but network expects {}", inputs.cols(),
                                      params.input_dim()));
  }
  ForwardResult result;
  auto& cache = result.cache;
  cache.inputs.reserve(params.layers.size());
  cache.pre_activations.reserve(params.layers.size());
  Matrix activation = inputs;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Matrix z = activation * layer.weight;
    z.rowwise() += layer.bias;
    cache.inputs.push_back(std::move(activation));
    if (l + 1 < params.layers.size()) {
      activation = z.cwiseMax(0.0);
    } else {
      result.outputs = z;
    }
    cache.pre_activations.push_back(std::move(z));
  }
  return result;
}

Matrix mlp_predict(const MlpParams& params, const Matrix& inputs) {
  if (static_cast<std::size_t>(inputs.cols()) != params.input_dim()) {
    throw InvalidArgument(fmt::format("mlp_predict: input width {} but network expects {}", inputs.cols(),
                                      params.input_dim()));
  }
  Matrix activation = inputs;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix z = activation * params.layers[l].weight;
    z.rowwise() += params.layers[l].bias;
    activation = (l + 1 < params.layers.size()) ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return activation;
}

BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache, const Matrix& doutputs) {
  const std::size_t n_layers = params.layers.size();
  if (cache.inputs.size() != n_layers || cache.pre_activations.size() != n_layers) {
    throw InvalidArgument("mlp_backward: cache does not match network depth");
  }
  if (doutputs.rows() != cache.inputs.front().rows() ||
      static_cast<std::size_t>(doutputs.cols()) != params.output_dim()) {
    throw InvalidArgument("mlp_backward: doutputs shape does not match forward pass");
  }
  BackwardResult result;
  result.grads.layers.resize(n_layers);
  Matrix delta = doutputs;
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = params.layers[l];
    const auto& input = cache.inputs[l];
    if (input.cols() != layer.weight.rows()) {
      throw InvalidArgument(fmt::format("mlp_backward: cache/params mismatch at layer {}", l));
    }
    result.grads.layers[l].weight = input.transpose() * delta;
    result.grads.layers[l].bias = delta.colwise().sum();
    Matrix dinput = delta * layer.weight.transpose();
    if (l == 0) {
      result.dinputs = std::move(dinput);
    } else {
      const auto& z_prev = cache.pre_activations[l - 1];
      delta = (z_prev.array() > 0.0).select(dinput, 0.0);
    }
  }
  return result;
}

XentResult weighted_softmax_xent(const Matrix& logits, std::span<const ClassId> labels,
                                 std::span<const double> weights) {
  const auto rows = logits.rows();
  const auto classes = logits.cols();
  if (static_cast<std::size_t>(rows) != labels.size() || labels.size() != weights.size()) {
    throw InvalidArgument("weighted_softmax_xent: logits, labels and weights disagree in length");
  }
  if (rows == 0) throw InvalidArgument("weighted_softmax_xent: empty batch");
  if (!logits.allFinite()) throw NumericalError("weighted_softmax_xent: non-finite logits");
  XentResult result;
  result.dlogits.resize(rows, classes);
  const double inv_batch = 1.0 / static_cast<double>(rows);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    const ClassId y = labels[static_cast<std::size_t>(i)];
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("weighted_softmax_xent: weight outside [0, 1]");
    if (y < 0 || y >= classes) throw InvalidArgument("weighted_softmax_xent: label out of range");
    const auto row = logits.row(i);
    const double max_logit = row.maxCoeff();
    const RowVector shifted_exp = (row.array() - max_logit).exp();
    const double sum = shifted_exp.sum();
    const double log_sum_exp = max_logit + std::log(sum);
    loss -= w * (row(y) - log_sum_exp);
    if (w == 0.0) {
      result.dlogits.row(i).setZero();
    } else {
      result.dlogits.row(i) = shifted_exp * (w * inv_batch / sum);
      result.dlogits(i, y) -= w * inv_batch;
    }
  }
  result.loss = loss * inv_batch;
  return result;
}

std::vector<double> per_sample_xent(const Matrix& logits, std::span<const ClassId> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw InvalidArgument("per_sample_xent: logits and labels disagree in length");
  }
  if (!logits.allFinite()) throw NumericalError("per_sample_xent: non-finite logits");
  std::vector<double> losses(labels.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const double max_logit = row.maxCoeff();
    const double log_sum_exp = max_logit + std::log((row.array() - max_logit).exp().sum());
    losses[static_cast<std::size_t>(i)] = log_sum_exp - row(labels[static_cast<std::size_t>(i)]);
  }
  return losses;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const RowVector e = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
    probs.row(i) = e / e.sum();
  }
  return probs;
}

void adam_step(MlpParams& params, const GradientSet& grads, AdamState& state, double lr,
               const AdamOptions& options) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("adam_step: learning rate must be >= 0");
  check_congruent(params, grads, "adam_step");
  if (state.m.layers.empty()) state = AdamState::zeros_like(params);
  check_congruent(params, state.m, "adam_step (state)");
  if (!grads.all_finite()) throw NumericalError("adam_step: non-finite gradient");

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = options.beta1 * m + (1.0 - options.beta1) * grad;
    v = options.beta2 * v + (1.0 - options.beta2) * grad.cwiseAbs2();
    if (lr == 0.0) return;
    param.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + options.epsilon);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, grads.layers[l].weight, state.m.layers[l].weight, state.v.layers[l].weight);
    update(params.layers[l].bias, grads.layers[l].bias, state.m.layers[l].bias, state.v.layers[l].bias);
  }
}

double clip_gradients(GradientSet& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw InvalidArgument("clip_gradients: max_norm must be positive");
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& layer : grads.layers) {
      layer.weight *= scale;
      layer.bias *= scale;
    }
  }
  return norm;
}

void write_snapshot(const MlpParams& params, std::ostream& out) {
  params.validate();
  nlohmann::json header;
  header["format"] = "asss-mlp";
  header["version"] = 1;
  header["hidden_activation"] = "relu";
  header["output"] = params.output_kind == OutputKind::kSingleLogit ? "single_logit" : "logits";
  header["layers"] = nlohmann::json::array();
  for (const auto& layer : params.layers) {
    header["layers"].push_back({layer.weight.rows(), layer.weight.cols()});
  }
  const std::string text = header.dump();
  out.write(kSnapshotMagic, sizeof kSnapshotMagic);
  write_u64_le(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  auto put = [&](double value) { write_u64_le(out, std::bit_cast<std::uint64_t>(value)); };
  for (const auto& layer : params.layers) {
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) put(layer.weight(i, j));
    }
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) put(layer.bias(j));
  }
  if (!out) throw DataError("failed to write snapshot");
}

MlpParams read_snapshot(std::istream& in) {
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kSnapshotMagic))) {
    throw DataError("not an MLP snapshot (bad magic)");
  }
  const std::uint64_t header_len = read_u64_le(in);
  if (header_len > (1u << 24)) throw DataError("snapshot header too large");
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("snapshot truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("snapshot header is not valid JSON: {}", e.what()));
  }
  if (header.value("format", "") != "asss-mlp" || header.value("version", 0) != 1) {
    throw DataError("unsupported snapshot format");
  }
  MlpParams params;
  params.output_kind = header.value("output", "logits") == "single_logit" ? OutputKind::kSingleLogit
                                                                           : OutputKind::kLogits;
  auto get = [&] { return std::bit_cast<double>(read_u64_le(in)); };
  for (const auto& shape : header.at("layers")) {
    const auto rows = shape.at(0).get<Eigen::Index>();
    const auto cols = shape.at(1).get<Eigen::Index>();
    DenseLayer layer{Matrix(rows, cols), RowVector(cols)};
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) layer.weight(i, j) = get();
    }
    for (Eigen::Index j = 0; j < cols; ++j) layer.bias(j) = get();
    params.layers.push_back(std::move(layer));
  }
  params.validate();
  return params;
}

void save_snapshot(const MlpParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write snapshot '{}'", path.string()));
  write_snapshot(params, out);
}

MlpParams load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open snapshot '{}'", path.string()));
  return read_snapshot(in);
}

}  // namespace asss
