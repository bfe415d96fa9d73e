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

#include <benchmark/benchmark.h>

#include "asss/baselines.hpp"
#include "synthetic.hpp"

namespace asss {
namespace {

// Shuttle-shaped input: 9 features, 7 classes.
const Dataset& shuttle_like(std::size_t n) {
  static std::size_t cached_n = 0;
  static Dataset cached;
  if (cached_n != n) {
    cached = test::make_uniform(n, 9, 7, 11);
    cached_n = n;
  }
  return cached;
}

void run_method(benchmark::State& state, SubsampleMethod method) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& data = shuttle_like(n);
  const SubsampleSpec spec{method, budget_from_ratio(n, 0.3), 7};
  for (auto _ : state) {
    auto idx = subsample(data, spec);
    benchmark::DoNotOptimize(idx.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_Random(benchmark::State& state) { run_method(state, SubsampleMethod::kRandom); }
void BM_KMeansSelect(benchmark::State& state) { run_method(state, SubsampleMethod::kKMeans); }
void BM_NnThinning(benchmark::State& state) { run_method(state, SubsampleMethod::kNnThinning); }

BENCHMARK(BM_Random)->Arg(5800)->Arg(58000);
BENCHMARK(BM_KMeansSelect)->Arg(1000)->Arg(5800)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_NnThinning)->Arg(5800)->Arg(58000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace asss
