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

// Binary Gumbel-Softmax (relaxed Bernoulli) and temperature annealing.

#ifndef ASSS_GUMBEL_HPP_
#define ASSS_GUMBEL_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "asss/rng.hpp"

namespace asss {

inline constexpr double kProbabilityClamp = 1e-7;
inline constexpr double kUniformClamp = 1e-12;

/// Clamps p into [kProbabilityClamp, 1 - kProbabilityClamp].
double clamp_probability(double p) noexcept;

/// Logistic sigmoid, evaluated without overflow for large |x|.
double sigmoid(double x) noexcept;

/// -log(-log u) with u clamped into [1e-12, 1 - 1e-12].
double gumbel_from_uniform(double u) noexcept;

double sample_gumbel(Rng& rng);

struct RelaxedSample {
  double z_tilde = 0.0;
  double dz_dlogit = 0.0;  // d z_tilde / d s where p = sigmoid(s)
};

/// z = sigmoid((log p - log(1-p) + g - g') / tau), the two-way Gumbel-Softmax
/// written as a single sigmoid. p is clamped first. Throws for tau <= 0.
RelaxedSample relaxed_bernoulli(double p, double tau, double g, double g_prime);

struct TemperatureSchedule {
  double tau_init = 1.0;
  double tau_final = 0.1;
  std::size_t total_steps = 1;

  void validate() const;
};

/// tau(t) = tau_init * (tau_final / tau_init)^(t / T); tau_init when T = 0.
double anneal_temperature(std::size_t step, const TemperatureSchedule& schedule);

/// Relaxed mask for a batch: one fresh (g, g') pair per entry.
struct RelaxedMask {
  std::vector<double> z_tilde;
  std::vector<double> dz_dlogit;
  std::vector<double> p;
  std::vector<std::pair<double, double>> gumbel_pairs;
};

std::vector<std::pair<double, double>> draw_gumbel_pairs(std::size_t count, Rng& rng);

RelaxedMask relax_batch(std::span<const double> p, double tau,
                        std::span<const std::pair<double, double>> gumbel_pairs);

}  // namespace asss

#endif  // ASSS_GUMBEL_HPP_
