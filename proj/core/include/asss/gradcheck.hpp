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

// Central finite-difference checks of the analytic gradients.

#ifndef ASSS_GRADCHECK_HPP_
#define ASSS_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "asss/tensor_nn.hpp"

namespace asss {

struct GradCheckResult {
  std::string name;
  std::size_t partials = 0;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// |a - b| / max(|a|, |b|, 1e-6). The floor keeps partials that are zero up
/// to round-off from dominating the ratio.
double relative_error(double analytic, double numeric) noexcept;

/// Compares `analytic` with central differences of `loss` over every entry
/// of `params` (which is perturbed in place and restored).
GradCheckResult compare_with_finite_differences(std::string name, MlpParams& params, const GradientSet& analytic,
                                                const std::function<double()>& loss, double tolerance,
                                                double step = kFiniteDifferenceStep);

/// Weighted softmax cross-entropy through a random MLP (< 200 parameters),
/// parameter and input gradients, tolerance 1e-4.
GradCheckResult check_task_network(std::uint64_t seed);
GradCheckResult check_input_gradients(std::uint64_t seed);

/// Selector objective (frozen Gumbel noise, lambda 0.1, beta 0.01) against a
/// fixed task network, tolerance 1e-3.
GradCheckResult check_selector_objective(std::uint64_t seed);

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed = 20240601);

}  // namespace asss

#endif  // ASSS_GRADCHECK_HPP_
