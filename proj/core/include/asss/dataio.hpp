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

// Tabular dataset loading (KEEL .dat and CSV), feature standardization and
// repeated stratified k-fold splitting.

#ifndef ASSS_DATAIO_HPP_
#define ASSS_DATAIO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asss/types.hpp"

namespace asss {

/// Feature matrix plus dense class labels.
///
/// Invariants (checked by validate()): every feature is finite, every label
/// lies in [0, class_count) and every class id occurs at least once.
struct Dataset {
  Matrix features;                       // N x d
  std::vector<ClassId> labels;           // N
  int class_count = 0;                   // K
  std::vector<std::string> feature_names;  // d
  std::vector<std::string> class_names;    // K, indexed by class id
  std::string source_name;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws DataError describing the first violated invariant.
  void validate() const;

  /// Rows in `rows` order. The class id space is kept as is, so a subset may
  /// not contain every class.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Number of rows per class id.
  std::vector<std::size_t> class_counts() const;
};

bool operator==(const Dataset& a, const Dataset& b);

struct StandardizationStats {
  Vector mean;
  Vector stddev;  // every entry >= kStddevFloor
};

inline constexpr double kStddevFloor = 1e-8;

struct FoldSplit {
  IndexList train_indices;  // sorted ascending
  IndexList test_indices;   // sorted ascending
};

/// Parses a KEEL `.dat` file. The class attribute is the one named by
/// `@outputs`, or the last declared attribute when `@outputs` is absent.
/// Nominal input attributes are one-hot encoded in declared level order.
/// Class ids follow first appearance in the `@data` section.
Dataset parse_keel(const std::filesystem::path& path);
Dataset parse_keel_text(std::string_view text, std::string source_name);

/// Label column selected by header name or zero-based position.
using LabelColumn = std::variant<std::string, std::size_t>;

/// Parses a CSV file with a header row. All non-label columns must be
/// numeric. Quoted fields ("a, b" and "" escapes) are supported.
Dataset parse_csv(const std::filesystem::path& path, const LabelColumn& label);
Dataset parse_csv_text(std::string_view text, const LabelColumn& label, std::string source_name);

/// Population mean/stddev over `rows`; stddev floored at kStddevFloor.
StandardizationStats fit_standardizer(const Matrix& features, std::span<const std::size_t> rows);

/// (x - mean) / stddev column-wise.
Matrix apply_standardizer(const Matrix& features, const StandardizationStats& stats);

/// k stratified folds. Each class is shuffled with a stream seeded by `seed`
/// and dealt round-robin over the folds; the dealing position carries over
/// from one class to the next so fold sizes stay balanced.
std::vector<FoldSplit> stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed);

/// Stratified two-way split: returns (kept, held_out) with roughly
/// `held_out_fraction` of every class held out (at least one per class with
/// two or more members).
std::pair<IndexList, IndexList> stratified_holdout(std::span<const ClassId> labels,
                                                   std::span<const std::size_t> rows,
                                                   double held_out_fraction, std::uint64_t seed);

}  // namespace asss

#endif  // ASSS_DATAIO_HPP_
