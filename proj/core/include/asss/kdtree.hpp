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

#ifndef ASSS_KDTREE_HPP_
#define ASSS_KDTREE_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "asss/types.hpp"

namespace asss {

/// Sum of squared coordinate differences, accumulated in index order.
double squared_distance(const double* a, const double* b, std::size_t dim) noexcept;

/// Exact Euclidean nearest-neighbour index over a fixed point set.
///
/// Ties are broken toward the lower original row index, so results match a
/// brute-force scan that keeps the first minimum. Points can be removed to
/// support "nearest still-available point" queries.
class KdTree {
 public:
  explicit KdTree(const Matrix& points, std::size_t leaf_size = 8);

  struct Hit {
    std::size_t index;
    double squared_distance;
  };

  /// Nearest available point, or nullopt once every point is removed.
  std::optional<Hit> nearest(const double* query) const;

  void remove(std::size_t index);
  std::size_t available() const { return nodes_.empty() ? 0 : nodes_.front().available; }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t left = 0;   // 0 marks a leaf
    std::size_t right = 0;
    std::size_t parent = 0;
    std::size_t split_dim = 0;
    double split_value = 0.0;
    std::size_t available = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end, std::size_t parent);
  void search(std::size_t node, const double* query, Hit& best, bool& found) const;

  std::size_t dim_;
  std::size_t leaf_size_;
  std::vector<double> coords_;       // points in tree order, row-major
  std::vector<std::size_t> order_;   // tree slot -> original index
  std::vector<std::size_t> slot_of_;  // original index -> tree slot
  std::vector<std::size_t> leaf_of_;  // original index -> leaf node
  std::vector<bool> removed_;         // by tree slot
  std::vector<Node> nodes_;
};

}  // namespace asss

#endif  // ASSS_KDTREE_HPP_
