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

#include "asss/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "asss/error.hpp"
#include "asss/rng.hpp"

namespace asss {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == prefix;
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool is_missing(std::string_view token) {
  token = trim(token);
  return token.empty() || token == "?" || token == "<null>";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open dataset file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    parts.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

// Maps label tokens to dense ids in first-appearance order.
class LabelEncoder {
 public:
  ClassId encode(const std::string& token) {
    const auto [it, inserted] = ids_.try_emplace(token, static_cast<ClassId>(names_.size()));
    if (inserted) names_.push_back(token);
    return it->second;
  }
  std::vector<std::string> names() const { return names_; }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::unordered_map<std::string, ClassId> ids_;
  std::vector<std::string> names_;
};

struct KeelAttribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> levels;
};

KeelAttribute parse_attribute(std::string_view rest, std::size_t line_no) {
  rest = trim(rest);
  if (rest.empty()) throw ParseError("@attribute without a name", line_no);
  KeelAttribute attr;
  std::string_view remainder;
  if (rest.front() == '\'' || rest.front() == '"') {
    const auto close = rest.find(rest.front(), 1);
    if (close == std::string_view::npos) throw ParseError("unterminated attribute name", line_no);
    attr.name = std::string(rest.substr(1, close - 1));
    remainder = trim(rest.substr(close + 1));
  } else {
    const auto brace = rest.find('{');
    const auto space = rest.find_first_of(" \t");
    const auto cut = std::min(brace, space);
    if (cut == std::string_view::npos) {
      throw ParseError(fmt::format("attribute '{}' has no type", rest), line_no);
    }
    attr.name = std::string(rest.substr(0, cut));
    remainder = trim(rest.substr(cut));
  }
  if (remainder.empty()) throw ParseError(fmt::format("attribute '{}' has no type", attr.name), line_no);

  if (remainder.front() == '{') {
    const auto close = remainder.find('}');
    if (close == std::string_view::npos) {
      throw ParseError(fmt::format("unterminated domain for attribute '{}'", attr.name), line_no);
    }
    attr.nominal = true;
    for (auto level : split_commas(remainder.substr(1, close - 1))) {
      if (level.empty()) {
        throw ParseError(fmt::format("empty level in domain of '{}'", attr.name), line_no);
      }
      attr.levels.push_back(unquote(level));
    }
    return attr;
  }
  std::size_t type_len = 0;
  while (type_len < remainder.size() && std::isalpha(static_cast<unsigned char>(remainder[type_len]))) {
    ++type_len;
  }
  const std::string type = lower(remainder.substr(0, type_len));
  if (type != "real" && type != "integer" && type != "numeric") {
    throw ParseError(
        fmt::format("unsupported type '{}' for attribute '{}'", remainder.substr(0, type_len), attr.name),
        line_no);
  }
  return attr;
}

std::vector<std::string> parse_name_list(std::string_view rest) {
  std::vector<std::string> names;
  for (auto part : split_commas(rest)) {
    if (!part.empty()) names.push_back(unquote(part));
  }
  return names;
}

Dataset finish_dataset(std::vector<double>&& values, std::size_t dim, std::vector<ClassId>&& labels,
                       const LabelEncoder& encoder, std::vector<std::string>&& feature_names,
                       std::string source_name) {
  Dataset ds;
  const std::size_t rows = labels.size();
  ds.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(rows),
                                         static_cast<Eigen::Index>(dim));
  ds.labels = std::move(labels);
  ds.class_count = encoder.size();
  ds.class_names = encoder.names();
  ds.feature_names = std::move(feature_names);
  ds.source_name = std::move(source_name);
  if (rows == 0) throw DataError(fmt::format("dataset '{}' has no data rows", ds.source_name));
  ds.validate();
  return ds;
}

// RFC-4180 subset reader: quoted fields, doubled-quote escapes and quoted
// newlines. Records are returned with the line number they start on.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

std::vector<CsvRecord> read_csv_records(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(field_quoted ? field : std::string(trim(field)));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = CsvRecord{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!trim(field).empty()) throw ParseError("quote inside unquoted field", line);
        field.clear();
        in_quotes = true;
        field_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        current.line = line;
        break;
      default:
        if (field_quoted) throw ParseError("characters after closing quote", line);
        field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", current.line);
  end_record();
  return records;
}

}  // namespace

void Dataset::validate() const {
  const auto n = labels.size();
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw DataError(fmt::format("feature rows ({}) != label count ({})", features.rows(), n));
  }
  if (!feature_names.empty() && feature_names.size() != dim()) {
    throw DataError("feature name count does not match feature width");
  }
  if (!features.allFinite()) throw DataError("dataset contains non-finite feature values");
  if (class_count <= 0) throw DataError("dataset has no classes");
  if (n < static_cast<std::size_t>(class_count)) throw DataError("fewer samples than classes");
  std::vector<std::size_t> seen(static_cast<std::size_t>(class_count), 0);
  for (ClassId y : labels) {
    if (y < 0 || y >= class_count) throw DataError(fmt::format("label {} out of range", y));
    ++seen[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (seen[c] == 0) throw DataError(fmt::format("class id {} never occurs", c));
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
  }
  out.class_count = class_count;
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.source_name = source_name;
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(class_count, 0)), 0);
  for (ClassId y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
         a.features == b.features && a.labels == b.labels && a.class_count == b.class_count &&
         a.feature_names == b.feature_names && a.class_names == b.class_names &&
         a.source_name == b.source_name;
}

Dataset parse_keel(const std::filesystem::path& path) {
  return parse_keel_text(read_file(path), path.stem().string());
}

Dataset parse_keel_text(std::string_view text, std::string source_name) {
  std::vector<KeelAttribute> attributes;
  std::optional<std::vector<std::string>> inputs;
  std::optional<std::vector<std::string>> outputs;
  const auto lines = split_lines(text);
  std::size_t line_idx = 0;
  bool saw_data = false;

  for (; line_idx < lines.size(); ++line_idx) {
    const auto line_no = line_idx + 1;
    const auto line = trim(lines[line_idx]);
    if (line.empty() || line.front() == '%') continue;
    if (line.front() != '@') throw ParseError("expected a header directive before @data", line_no);
    if (starts_with_ci(line, "@relation")) continue;
    if (starts_with_ci(line, "@attribute")) {
      attributes.push_back(parse_attribute(line.substr(10), line_no));
    } else if (starts_with_ci(line, "@inputs") || starts_with_ci(line, "@input")) {
      inputs = parse_name_list(line.substr(starts_with_ci(line, "@inputs") ? 7 : 6));
    } else if (starts_with_ci(line, "@outputs") || starts_with_ci(line, "@output")) {
      outputs = parse_name_list(line.substr(starts_with_ci(line, "@outputs") ? 8 : 7));
    } else if (starts_with_ci(line, "@data")) {
      saw_data = true;
      ++line_idx;
      break;
    } else {
      throw ParseError(fmt::format("unknown directive '{}'", line), line_no);
    }
  }
  if (!saw_data) throw ParseError("missing @data section", 0);
  if (attributes.size() < 2) throw ParseError("need at least one input attribute and a class", 0);

  auto find_attr = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
      if (attributes[i].name == name) return i;
    }
    throw ParseError(fmt::format("@inputs/@outputs names undeclared attribute '{}'", name), 0);
  };

  std::size_t class_attr = attributes.size() - 1;
  if (outputs) {
    if (outputs->size() != 1) throw ParseError("exactly one output attribute is supported", 0);
    class_attr = find_attr(outputs->front());
  }
  std::vector<bool> is_input(attributes.size(), false);
  if (inputs) {
    for (const auto& name : *inputs) is_input[find_attr(name)] = true;
  } else {
    std::fill(is_input.begin(), is_input.end(), true);
  }
  is_input[class_attr] = false;

  std::vector<std::string> feature_names;
  for (std::size_t a = 0; a < attributes.size(); ++a) {
    if (!is_input[a]) continue;
    const auto& attr = attributes[a];
    if (attr.nominal) {
      for (const auto& level : attr.levels) feature_names.push_back(attr.name + "=" + level);
    } else {
      feature_names.push_back(attr.name);
    }
  }
  const std::size_t dim = feature_names.size();
  if (dim == 0) throw ParseError("no input attributes", 0);

  std::vector<double> values;
  std::vector<ClassId> labels;
  LabelEncoder encoder;
  for (; line_idx < lines.size(); ++line_idx) {
    const auto line_no = line_idx + 1;
    const auto line = trim(lines[line_idx]);
    if (line.empty() || line.front() == '%') continue;
    const auto tokens = split_commas(line);
    if (tokens.size() != attributes.size()) {
      throw ParseError(fmt::format("expected {} values, found {}", attributes.size(), tokens.size()),
                       line_no);
    }
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      const auto& attr = attributes[a];
      const auto token = tokens[a];
      if (is_missing(token)) {
        throw ParseError(fmt::format("missing value for attribute '{}'", attr.name), line_no);
      }
      if (a == class_attr) {
        const std::string label = unquote(token);
        if (attr.nominal &&
            std::find(attr.levels.begin(), attr.levels.end(), label) == attr.levels.end()) {
          throw ParseError(fmt::format("class value '{}' not in declared domain", label), line_no);
        }
        labels.push_back(encoder.encode(label));
        continue;
      }
      if (!is_input[a]) continue;
      if (attr.nominal) {
        const std::string level = unquote(token);
        const auto it = std::find(attr.levels.begin(), attr.levels.end(), level);
        if (it == attr.levels.end()) {
          throw ParseError(fmt::format("value '{}' not in domain of '{}'", level, attr.name), line_no);
        }
        for (auto l = attr.levels.begin(); l != attr.levels.end(); ++l) {
          values.push_back(l == it ? 1.0 : 0.0);
        }
      } else {
        const auto number = parse_number(token);
        if (!number) {
          throw ParseError(fmt::format("non-numeric value '{}' for attribute '{}'", token, attr.name),
                           line_no);
        }
        values.push_back(*number);
      }
    }
  }
  return finish_dataset(std::move(values), dim, std::move(labels), encoder, std::move(feature_names),
                        std::move(source_name));
}

Dataset parse_csv(const std::filesystem::path& path, const LabelColumn& label) {
  return parse_csv_text(read_file(path), label, path.stem().string());
}

Dataset parse_csv_text(std::string_view text, const LabelColumn& label, std::string source_name) {
  const auto records = read_csv_records(text);
  if (records.empty()) throw ParseError("CSV has no header row", 1);
  const auto& header = records.front().fields;

  std::size_t label_col = 0;
  if (const auto* name = std::get_if<std::string>(&label)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw DataError(fmt::format("label column '{}' not found in header", *name));
    label_col = static_cast<std::size_t>(it - header.begin());
  } else {
    label_col = std::get<std::size_t>(label);
    if (label_col >= header.size()) {
      throw DataError(fmt::format("label column index {} out of range ({} columns)", label_col,
                                  header.size()));
    }
  }
  if (header.size() < 2) throw ParseError("CSV needs at least one feature column and a label", 1);

  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) feature_names.push_back(header[c]);
  }
  std::vector<double> values;
  std::vector<ClassId> labels;
  LabelEncoder encoder;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw ParseError(fmt::format("expected {} fields, found {}", header.size(), rec.fields.size()),
                       rec.line);
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& cell = rec.fields[c];
      if (is_missing(cell)) throw ParseError(fmt::format("missing value in column '{}'", header[c]), rec.line);
      if (c == label_col) {
        labels.push_back(encoder.encode(cell));
        continue;
      }
      const auto number = parse_number(cell);
      if (!number) {
        throw ParseError(fmt::format("non-numeric value '{}' in column '{}'", cell, header[c]), rec.line);
      }
      values.push_back(*number);
    }
  }
  return finish_dataset(std::move(values), feature_names.size(), std::move(labels), encoder,
                        std::move(feature_names), std::move(source_name));
}

StandardizationStats fit_standardizer(const Matrix& features, std::span<const std::size_t> rows) {
  if (rows.empty()) throw InvalidArgument("fit_standardizer: empty row subset");
  const auto d = features.cols();
  StandardizationStats stats{Vector::Zero(d), Vector::Zero(d)};
  for (std::size_t r : rows) {
    if (r >= static_cast<std::size_t>(features.rows())) {
      throw InvalidArgument("fit_standardizer: row index out of range");
    }
    stats.mean += features.row(static_cast<Eigen::Index>(r)).transpose();
  }
  const double n = static_cast<double>(rows.size());
  stats.mean /= n;
  for (std::size_t r : rows) {
    const Vector centered = features.row(static_cast<Eigen::Index>(r)).transpose() - stats.mean;
    stats.stddev += centered.cwiseAbs2();
  }
  stats.stddev = (stats.stddev / n).cwiseSqrt().cwiseMax(kStddevFloor);
  return stats;
}

Matrix apply_standardizer(const Matrix& features, const StandardizationStats& stats) {
  if (features.cols() != stats.mean.size() || stats.mean.size() != stats.stddev.size()) {
    throw InvalidArgument(fmt::format("apply_standardizer: {} columns but stats of length {}",
                                      features.cols(), stats.mean.size()));
  }
  Matrix out = (features.rowwise() - stats.mean.transpose()).array().rowwise() /
               stats.stddev.transpose().array();
  if (!out.allFinite()) throw NumericalError("standardization produced non-finite values");
  return out;
}

std::vector<FoldSplit> stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("stratified_kfold: k must be at least 2");
  std::vector<IndexList> by_class(static_cast<std::size_t>(dataset.class_count));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() < k) {
      const std::string name = c < dataset.class_names.size() ? dataset.class_names[c] : std::to_string(c);
      throw DataError(fmt::format("class '{}' has {} members, fewer than k = {} folds", name,
                                  by_class[c].size(), k));
    }
  }
  Rng rng(seed);
  std::vector<FoldSplit> folds(k);
  std::size_t position = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : members) {
      folds[position % k].test_indices.push_back(idx);
      ++position;
    }
  }
  for (auto& fold : folds) {
    std::sort(fold.test_indices.begin(), fold.test_indices.end());
    std::vector<bool> in_test(dataset.size(), false);
    for (std::size_t idx : fold.test_indices) in_test[idx] = true;
    fold.train_indices.reserve(dataset.size() - fold.test_indices.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (!in_test[i]) fold.train_indices.push_back(i);
    }
  }
  return folds;
}

std::pair<IndexList, IndexList> stratified_holdout(std::span<const ClassId> labels,
                                                   std::span<const std::size_t> rows,
                                                   double held_out_fraction, std::uint64_t seed) {
  if (!(held_out_fraction > 0.0 && held_out_fraction < 1.0)) {
    throw InvalidArgument("stratified_holdout: fraction must lie in (0, 1)");
  }
  std::vector<IndexList> by_class;
  for (std::size_t r : rows) {
    const auto c = static_cast<std::size_t>(labels[r]);
    if (c >= by_class.size()) by_class.resize(c + 1);
    by_class[c].push_back(r);
  }
  Rng rng(seed);
  IndexList kept;
  IndexList held;
  for (auto& members : by_class) {
    if (members.empty()) continue;
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t n_held = static_cast<std::size_t>(std::llround(held_out_fraction * members.size()));
    if (members.size() >= 2) n_held = std::clamp<std::size_t>(n_held, 1, members.size() - 1);
    else n_held = 0;
    held.insert(held.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_held));
    kept.insert(kept.end(), members.begin() + static_cast<std::ptrdiff_t>(n_held), members.end());
  }
  std::sort(kept.begin(), kept.end());
  std::sort(held.begin(), held.end());
  return {std::move(kept), std::move(held)};
}

}  // namespace asss
