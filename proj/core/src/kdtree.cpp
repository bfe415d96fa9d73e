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

#include "asss/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "asss/error.hpp"

namespace asss {

double squared_distance(const double* a, const double* b, std::size_t dim) noexcept {
  double sum = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return sum;
}

KdTree::KdTree(const Matrix& points, std::size_t leaf_size)
    : dim_(static_cast<std::size_t>(points.cols())), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) return;
  if (dim_ == 0) throw InvalidArgument("KdTree: zero-dimensional points");
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  coords_.assign(points.data(), points.data() + n * dim_);  // temporarily in original order
  nodes_.reserve(2 * n / leaf_size_ + 2);
  build(0, n, 0);

  std::vector<double> reordered(n * dim_);
  slot_of_.resize(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    std::copy_n(coords_.data() + order_[slot] * dim_, dim_, reordered.data() + slot * dim_);
    slot_of_[order_[slot]] = slot;
  }
  coords_ = std::move(reordered);
  removed_.assign(n, false);
  leaf_of_.resize(n);
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].left != 0) continue;
    for (std::size_t slot = nodes_[id].begin; slot < nodes_[id].end; ++slot) leaf_of_[order_[slot]] = id;
  }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end, std::size_t parent) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, 0, 0, parent, 0, 0.0, end - begin});
  if (end - begin <= leaf_size_) return id;

  std::size_t best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    double lo = coords_[order_[begin] * dim_ + j];
    double hi = lo;
    for (std::size_t s = begin + 1; s < end; ++s) {
      const double v = coords_[order_[s] * dim_ + j];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = j;
    }
  }
  if (best_spread <= 0.0) return id;  // all points coincide

  const std::size_t mid = begin + (end - begin) / 2;
  auto coord = [&](std::size_t idx) { return coords_[idx * dim_ + best_dim]; };
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return coord(a) < coord(b); });
  nodes_[id].split_dim = best_dim;
  nodes_[id].split_value = coord(order_[mid]);
  const std::size_t left = build(begin, mid, id);
  const std::size_t right = build(mid, end, id);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::size_t node_id, const double* query, Hit& best, bool& found) const {
  const Node& node = nodes_[node_id];
  if (node.available == 0) return;
  if (node.left == 0) {
    for (std::size_t slot = node.begin; slot < node.end; ++slot) {
      if (removed_[slot]) continue;
      const double d = squared_distance(query, coords_.data() + slot * dim_, dim_);
      const std::size_t idx = order_[slot];
      if (!found || d < best.squared_distance || (d == best.squared_distance && idx < best.index)) {
        best = {idx, d};
        found = true;
      }
    }
    return;
  }
  const double diff = query[node.split_dim] - node.split_value;
  const std::size_t near_child = diff < 0.0 ? node.left : node.right;
  const std::size_t far_child = diff < 0.0 ? node.right : node.left;
  search(near_child, query, best, found);
  // Points on the far side are at least |diff| away; <= keeps equal-distance
  // candidates with a lower index reachable.
  if (!found || diff * diff <= best.squared_distance) search(far_child, query, best, found);
}

std::optional<KdTree::Hit> KdTree::nearest(const double* query) const {
  if (nodes_.empty()) return std::nullopt;
  Hit best{0, 0.0};
  bool found = false;
  search(0, query, best, found);
  if (!found) return std::nullopt;
  return best;
}

void KdTree::remove(std::size_t index) {
  if (index >= slot_of_.size()) throw InvalidArgument("KdTree::remove: index out of range");
  const std::size_t slot = slot_of_[index];
  if (removed_[slot]) return;
  removed_[slot] = true;
  std::size_t node = leaf_of_[index];
  while (true) {
    --nodes_[node].available;
    if (node == 0) break;
    node = nodes_[node].parent;
  }
}

}  // namespace asss
