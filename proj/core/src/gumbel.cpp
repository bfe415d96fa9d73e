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

#include "asss/gumbel.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "asss/error.hpp"

namespace asss {

double clamp_probability(double p) noexcept {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gumbel_from_uniform(double u) noexcept {
  u = std::clamp(u, kUniformClamp, 1.0 - kUniformClamp);
  return -std::log(-std::log(u));
}

double sample_gumbel(Rng& rng) { return gumbel_from_uniform(rng.uniform()); }

RelaxedSample relaxed_bernoulli(double p, double tau, double g, double g_prime) {
  if (!(tau > 0.0)) throw InvalidArgument(fmt::format("relaxed_bernoulli: tau must be positive, got {}", tau));
  p = clamp_probability(p);
  const double log_odds = std::log(p) - std::log1p(-p);
  const double z = sigmoid((log_odds + g - g_prime) / tau);
  return {z, z * (1.0 - z) / tau};
}

void TemperatureSchedule::validate() const {
  if (!(tau_init > 0.0) || !(tau_final > 0.0)) throw InvalidArgument("temperatures must be positive");
  if (tau_final > tau_init) throw InvalidArgument("tau_final must not exceed tau_init");
}

double anneal_temperature(std::size_t step, const TemperatureSchedule& schedule) {
  schedule.validate();
  if (step > schedule.total_steps) {
    throw InvalidArgument(
        fmt::format("anneal_temperature: step {} beyond total_steps {}", step, schedule.total_steps));
  }
  if (schedule.total_steps == 0 || step == 0) return schedule.tau_init;
  if (step == schedule.total_steps) return schedule.tau_final;
  const double fraction = static_cast<double>(step) / static_cast<double>(schedule.total_steps);
  return schedule.tau_init * std::pow(schedule.tau_final / schedule.tau_init, fraction);
}

std::vector<std::pair<double, double>> draw_gumbel_pairs(std::size_t count, Rng& rng) {
  std::vector<std::pair<double, double>> pairs(count);
  for (auto& [g, g_prime] : pairs) {
    g = sample_gumbel(rng);
    g_prime = sample_gumbel(rng);
  }
  return pairs;
}

RelaxedMask relax_batch(std::span<const double> p, double tau,
                        std::span<const std::pair<double, double>> gumbel_pairs) {
  if (p.size() != gumbel_pairs.size()) throw InvalidArgument("relax_batch: noise/probability length mismatch");
  RelaxedMask mask;
  mask.p.assign(p.begin(), p.end());
  mask.gumbel_pairs.assign(gumbel_pairs.begin(), gumbel_pairs.end());
  mask.z_tilde.resize(p.size());
  mask.dz_dlogit.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto sample = relaxed_bernoulli(p[i], tau, gumbel_pairs[i].first, gumbel_pairs[i].second);
    mask.z_tilde[i] = sample.z_tilde;
    mask.dz_dlogit[i] = sample.dz_dlogit;
  }
  return mask;
}

}  // namespace asss
