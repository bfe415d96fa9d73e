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

#include <vector>

#include <benchmark/benchmark.h>

#include "asss/tensor_nn.hpp"
#include "asss/trainer.hpp"
#include "synthetic.hpp"

namespace asss {
namespace {

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  const std::vector<std::size_t> sizes{9, 128, 64, 7};
  const auto params = init_mlp(sizes, 1);
  const Matrix x = Matrix::Random(batch, 9);
  std::vector<ClassId> y(static_cast<std::size_t>(batch));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<ClassId>(i % 7);
  const std::vector<double> w(y.size(), 1.0);
  for (auto _ : state) {
    auto fwd = mlp_forward(params, x);
    auto xent = weighted_softmax_xent(fwd.outputs, y, w);
    auto grads = mlp_backward(params, fwd.cache, xent.dlogits);
    benchmark::DoNotOptimize(grads.grads.layers.front().weight.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(256)->Arg(1024);

void BM_AsssTrainStep(benchmark::State& state) {
  const auto data = test::make_blobs(37, 7, 9, 1.5, 3);  // 259 rows
  AsssConfig config;
  config.seed = 5;
  config.total_iters = 1u << 30;
  auto trainer = init_trainer(data.dim(), data.class_count, config);
  const Matrix batch = data.features.topRows(256);
  const std::vector<ClassId> labels(data.labels.begin(), data.labels.begin() + 256);
  for (auto _ : state) {
    auto record = train_step(trainer, batch, labels, data.class_count, config);
    benchmark::DoNotOptimize(record.selector_loss);
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_AsssTrainStep);

}  // namespace
}  // namespace asss
