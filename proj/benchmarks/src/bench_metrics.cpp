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

#include "asss/metrics.hpp"
#include "asss/rng.hpp"

namespace asss {
namespace {

void BM_MacroOvrAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  constexpr int k = 7;
  Rng rng(3);
  Matrix scores(static_cast<Eigen::Index>(n), k);
  std::vector<ClassId> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<ClassId>(rng.below(k));
    for (int c = 0; c < k; ++c) scores(static_cast<Eigen::Index>(i), c) = rng.uniform();
  }
  const auto preds = PredictionSet::from_scores(labels, scores);
  for (auto _ : state) benchmark::DoNotOptimize(macro_ovr_auc(preds, k));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MacroOvrAuc)->Arg(1000)->Arg(11600);

}  // namespace
}  // namespace asss
