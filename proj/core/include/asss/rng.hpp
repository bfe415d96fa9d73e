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

#ifndef ASSS_RNG_HPP_
#define ASSS_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace asss {

/// Seeded random stream.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard.
/// The distribution helpers are implemented here rather than through
/// <random>'s distributions, which are implementation-defined, so that a
/// seed reproduces bit-identical results across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Standard normal draw (Marsaglia polar method).
  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a over the bytes of `text`; stable across platforms.
std::uint64_t hash_tag(std::string_view text) noexcept;

/// Derives an independent stream seed from a parent seed and a cell identity.
/// Result = mix64(mix64(mix64(mix64(parent) ^ hash_tag(tag)) ^ a) ^ b).
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t a = 0,
                          std::uint64_t b = 0) noexcept;

}  // namespace asss

#endif  // ASSS_RNG_HPP_
