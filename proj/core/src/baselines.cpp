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

#include "asss/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "asss/error.hpp"
#include "asss/kdtree.hpp"
#include "asss/rng.hpp"

namespace asss {

namespace {

void check_budget(const Dataset& dataset, const SubsampleSpec& spec) {
  if (spec.budget == 0) throw InvalidArgument("subsample budget must be at least 1");
  if (spec.budget > dataset.size()) {
    throw InvalidArgument(fmt::format("subsample budget {} exceeds {} rows", spec.budget, dataset.size()));
  }
}

const double* row_ptr(const Matrix& m, std::size_t i) { return m.data() + i * static_cast<std::size_t>(m.cols()); }

// Uniform grid over (up to) three projected coordinates, cell side >= radius,
// so any point within `radius` lies in one of the 3^m neighbouring cells.
class ProjectedGrid {
 public:
  ProjectedGrid(const Matrix& points, double cell) : points_(points), cell_(cell) {
    const auto d = static_cast<std::size_t>(points.cols());
    std::vector<double> variance(d, 0.0);
    if (points.rows() > 0) {
      const RowVector mean = points.colwise().mean();
      for (std::size_t j = 0; j < d; ++j) {
        variance[j] = (points.col(static_cast<Eigen::Index>(j)).array() - mean(static_cast<Eigen::Index>(j))).square().sum();
      }
    }
    std::vector<std::size_t> dims(d);
    std::iota(dims.begin(), dims.end(), 0);
    std::stable_sort(dims.begin(), dims.end(), [&](std::size_t a, std::size_t b) { return variance[a] > variance[b]; });
    dims.resize(std::min<std::size_t>(d, 3));
    dims_ = dims;
  }

  using Key = std::array<std::int64_t, 3>;

  Key key_of(std::size_t row) const {
    Key key{0, 0, 0};
    const double* x = row_ptr(points_, row);
    for (std::size_t m = 0; m < dims_.size(); ++m) {
      const double scaled = std::floor(x[dims_[m]] / cell_);
      constexpr double kLimit = 4.0e18;
      key[m] = static_cast<std::int64_t>(std::clamp(scaled, -kLimit, kLimit));
    }
    return key;
  }

  // Calls visit(row) for every stored row in neighbouring cells until it
  // returns true; returns whether any call did.
  template <typename Visit>
  bool any_neighbour(const Key& key, Visit&& visit) const {
    return scan(key, 0, key, visit);
  }

  void insert(std::size_t row) { cells_[key_of(row)].push_back(row); }

 private:
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = mix64(static_cast<std::uint64_t>(k[0]));
      h = mix64(h ^ static_cast<std::uint64_t>(k[1]));
      return static_cast<std::size_t>(mix64(h ^ static_cast<std::uint64_t>(k[2])));
    }
  };

  template <typename Visit>
  bool scan(const Key& center, std::size_t depth, Key current, Visit& visit) const {
    if (depth == dims_.size()) {
      const auto it = cells_.find(current);
      if (it == cells_.end()) return false;
      for (std::size_t row : it->second) {
        if (visit(row)) return true;
      }
      return false;
    }
    for (std::int64_t offset = -1; offset <= 1; ++offset) {
      current[depth] = center[depth] + offset;
      if (scan(center, depth + 1, current, visit)) return true;
    }
    return false;
  }

  const Matrix& points_;
  double cell_;
  std::vector<std::size_t> dims_;
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> cells_;
};

}  // namespace

std::string_view to_string(SubsampleMethod method) {
  switch (method) {
    case SubsampleMethod::kRandom:
      return "random";
    case SubsampleMethod::kKMeans:
      return "kmeans";
    case SubsampleMethod::kNnThinning:
      return "nn-thinning";
  }
  return "unknown";
}

std::size_t budget_from_ratio(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidArgument("budget ratio must lie in (0, 1]");
  const double exact = ratio * static_cast<double>(n);
  const auto m = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(n, 1));
}

IndexList random_subsample(const Dataset& dataset, const SubsampleSpec& spec) {
  check_budget(dataset, spec);
  IndexList all(dataset.size());
  std::iota(all.begin(), all.end(), 0);
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < spec.budget; ++i) {
    std::swap(all[i], all[i + rng.below(all.size() - i)]);
  }
  all.resize(spec.budget);
  std::sort(all.begin(), all.end());
  return all;
}

IndexList kmeans_plus_plus(const Matrix& points, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto d = static_cast<std::size_t>(points.cols());
  if (k == 0 || k > n) throw InvalidArgument(fmt::format("k-means++: k = {} invalid for {} points", k, n));
  Rng rng(seed);
  IndexList centers;
  centers.reserve(k);
  std::vector<bool> is_center(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> closest(n, 0);
  std::vector<double> center_gap;  // squared distance from the newest centre to each earlier one

  auto add_center = [&](std::size_t row) {
    const std::size_t id = centers.size();
    centers.push_back(row);
    is_center[row] = true;
    center_gap.assign(id, 0.0);
    for (std::size_t c = 0; c < id; ++c) {
      center_gap[c] = squared_distance(row_ptr(points, row), row_ptr(points, centers[c]), d);
    }
    for (std::size_t i = 0; i < n; ++i) {
      // Triangle inequality: if |c_new - c_old| >= 2 |x - c_old| the new
      // centre cannot be closer.
      if (id > 0 && center_gap[closest[i]] >= 4.0 * d2[i]) continue;
      const double dist = squared_distance(row_ptr(points, i), row_ptr(points, row), d);
      if (dist < d2[i]) {
        d2[i] = dist;
        closest[i] = id;
      }
    }
  };

  add_center(rng.below(n));
  while (centers.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        running += d2[i];
        if (d2[i] > 0.0 && running > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding at the tail: take the last positive-weight row
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every row coincides with a centre; fall back to uniform over unused rows.
      std::size_t remaining = rng.below(n - centers.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (is_center[i]) continue;
        if (remaining-- == 0) {
          pick = i;
          break;
        }
      }
    }
    add_center(pick);
  }
  return centers;
}

KMeansResult lloyd_kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto seeds = kmeans_plus_plus(points, k, seed);
  KMeansResult result;
  result.centroids.resize(static_cast<Eigen::Index>(k), points.cols());
  for (std::size_t c = 0; c < k; ++c) {
    result.centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(seeds[c]));
  }
  result.assignment.assign(n, 0);
  Matrix sums(static_cast<Eigen::Index>(k), points.cols());
  std::vector<std::size_t> counts(k);

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    const KdTree tree(result.centroids);
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto hit = tree.nearest(row_ptr(points, i));
      result.assignment[i] = hit->index;
      inertia += hit->squared_distance;
    }
    result.inertia_history.push_back(inertia);
    result.iterations = iter + 1;
    if (iter > 0) {
      const double previous = result.inertia_history[iter - 1];
      if (previous <= 0.0 || (previous - inertia) <= options.relative_tolerance * previous) break;
    } else if (inertia == 0.0) {
      break;
    }
    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(result.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
      ++counts[result.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        result.centroids.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
      }
    }
  }
  return result;
}

IndexList kmeans_select(const Dataset& dataset, const SubsampleSpec& spec, KMeansResult* diagnostics) {
  check_budget(dataset, spec);
  auto km = lloyd_kmeans(dataset.features, spec.budget, spec.seed);
  KdTree rows(dataset.features);
  IndexList chosen;
  chosen.reserve(spec.budget);
  for (std::size_t c = 0; c < spec.budget; ++c) {
    const auto hit = rows.nearest(km.centroids.data() + c * static_cast<std::size_t>(km.centroids.cols()));
    chosen.push_back(hit->index);
    rows.remove(hit->index);
  }
  std::sort(chosen.begin(), chosen.end());
  if (diagnostics != nullptr) *diagnostics = std::move(km);
  return chosen;
}

IndexList thinning_order(std::size_t n, std::uint64_t seed) {
  IndexList order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

IndexList thin_by_radius(const Matrix& points, std::span<const std::size_t> order, double radius, std::size_t stop_at) {
  if (!(radius >= 0.0)) throw InvalidArgument("thinning radius must be >= 0");
  const auto d = static_cast<std::size_t>(points.cols());
  const double r2 = radius * radius;
  ProjectedGrid grid(points, radius > 0.0 ? radius : 1.0);
  IndexList kept;
  for (std::size_t row : order) {
    if (kept.size() >= stop_at) break;
    const double* x = row_ptr(points, row);
    const bool blocked = grid.any_neighbour(grid.key_of(row), [&](std::size_t other) {
      return squared_distance(x, row_ptr(points, other), d) <= r2;
    });
    if (blocked) continue;
    kept.push_back(row);
    grid.insert(row);
  }
  return kept;
}

IndexList nn_thinning(const Dataset& dataset, const SubsampleSpec& spec, ThinningDiagnostics* diagnostics) {
  check_budget(dataset, spec);
  const Matrix& points = dataset.features;
  const auto order = thinning_order(dataset.size(), spec.seed);
  ThinningDiagnostics diag;

  // 2 * max distance to the mean bounds the diameter from above.
  const RowVector mean = points.colwise().mean();
  const double max_radius = (points.rowwise() - mean).rowwise().norm().maxCoeff();
  diag.upper_bound = 2.0 * max_radius;

  IndexList kept = thin_by_radius(points, order, 0.0, spec.budget);
  if (kept.size() < spec.budget) {
    // Exact duplicates: even radius 0 keeps fewer than M rows. Top up with the
    // earliest skipped rows in scan order.
    std::vector<bool> taken(dataset.size(), false);
    for (std::size_t r : kept) taken[r] = true;
    for (std::size_t r : order) {
      if (kept.size() == spec.budget) break;
      if (!taken[r]) {
        kept.push_back(r);
        ++diag.duplicate_fill;
      }
    }
  } else {
    double lo = 0.0;
    double hi = diag.upper_bound;
    for (std::size_t step = 0; step < 40; ++step) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      ++diag.bisection_steps;
      if (thin_by_radius(points, order, mid, spec.budget).size() >= spec.budget) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    diag.radius = lo;
    kept = thin_by_radius(points, order, lo, spec.budget);
  }
  std::sort(kept.begin(), kept.end());
  if (diagnostics != nullptr) *diagnostics = diag;
  return kept;
}

IndexList subsample(const Dataset& dataset, const SubsampleSpec& spec) {
  switch (spec.method) {
    case SubsampleMethod::kRandom:
      return random_subsample(dataset, spec);
    case SubsampleMethod::kKMeans:
      return kmeans_select(dataset, spec);
    case SubsampleMethod::kNnThinning:
      return nn_thinning(dataset, spec);
  }
  throw InvalidArgument("unknown subsample method");
}

}  // namespace asss
