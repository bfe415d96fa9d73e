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

#ifndef ASSS_ERROR_HPP_
#define ASSS_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asss {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed an argument or configuration that violates a precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data is missing, unreadable or violates a data contract.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. line() is 1-based; 0 when no line applies.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A NaN/Inf surfaced during training or evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace asss

#endif  // ASSS_ERROR_HPP_
