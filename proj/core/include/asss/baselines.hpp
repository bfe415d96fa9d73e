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

// Heuristic subsamplers used as comparison points: uniform random,
// k-means centroid-nearest and nearest-neighbour thinning. Each returns
// exactly `budget` distinct row indices, sorted ascending.

#ifndef ASSS_BASELINES_HPP_
#define ASSS_BASELINES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "asss/dataio.hpp"
#include "asss/types.hpp"

namespace asss {

enum class SubsampleMethod { kRandom, kKMeans, kNnThinning };

std::string_view to_string(SubsampleMethod method);

struct SubsampleSpec {
  SubsampleMethod method = SubsampleMethod::kRandom;
  std::size_t budget = 0;  // M
  std::uint64_t seed = 0;
};

/// ceil(ratio * n), robust to representation error (0.3 * 46400 -> 13920),
/// clamped to [1, n].
std::size_t budget_from_ratio(std::size_t n, double ratio);

IndexList random_subsample(const Dataset& dataset, const SubsampleSpec& spec);

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double relative_tolerance = 1e-4;
};

struct KMeansResult {
  Matrix centroids;                     // k x d
  std::vector<std::size_t> assignment;  // per point, centroid id
  std::vector<double> inertia_history;  // one entry per assignment step
  std::size_t iterations = 0;
};

/// k-means++ seeding; returns the row indices picked as initial centres.
IndexList kmeans_plus_plus(const Matrix& points, std::size_t k, std::uint64_t seed);

/// Lloyd iterations from k-means++ seeds. Stops after max_iterations or when
/// the relative inertia decrease falls below the tolerance. Empty clusters
/// keep their previous centroid.
KMeansResult lloyd_kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

/// k-means with k = budget, then the nearest unclaimed row for each centroid
/// in centroid order.
IndexList kmeans_select(const Dataset& dataset, const SubsampleSpec& spec, KMeansResult* diagnostics = nullptr);

/// Seed-determined scan order used by nn_thinning.
IndexList thinning_order(std::size_t n, std::uint64_t seed);

/// Greedy pass in `order`: keep a point iff its distance to every kept
/// point exceeds `radius`. Stops once `stop_at` points are kept. Result is in
/// keep order.
IndexList thin_by_radius(const Matrix& points, std::span<const std::size_t> order, double radius,
                         std::size_t stop_at = static_cast<std::size_t>(-1));

struct ThinningDiagnostics {
  double radius = 0.0;
  double upper_bound = 0.0;
  std::size_t bisection_steps = 0;
  std::size_t duplicate_fill = 0;  // rows added because even radius 0 kept fewer than M
};

/// Bisects the radius so the greedy pass keeps at least M rows, then takes
/// the first M in keep order.
IndexList nn_thinning(const Dataset& dataset, const SubsampleSpec& spec, ThinningDiagnostics* diagnostics = nullptr);

IndexList subsample(const Dataset& dataset, const SubsampleSpec& spec);

}  // namespace asss

#endif  // ASSS_BASELINES_HPP_
