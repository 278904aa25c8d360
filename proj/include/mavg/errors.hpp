// Copyright 2026 The mavg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mavg {

// Bad arguments: dimension mismatch, out-of-range hyperparameters, bad files.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// No admissible step size / delta / grid point satisfies the conditions.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A non-finite coordinate appeared while iterating.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t meta_iteration,
                  std::size_t local_step)
      : std::runtime_error(what),
        meta_iteration_(meta_iteration),
        local_step_(local_step) {}

  std::size_t meta_iteration() const { return meta_iteration_; }
  std::size_t local_step() const { return local_step_; }

 private:
  std::size_t meta_iteration_;
  std::size_t local_step_;
};

// Malformed input file; line is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

  /// Same error with a prefix (typically the file name) on the message.
  ParseError with_context(const std::string& prefix) const {
    return ParseError(prefix + ": " + what(), line_, Raw{});
  }

 private:
  struct Raw {};
  ParseError(const std::string& what, std::size_t line, Raw)
      : std::runtime_error(what), line_(line) {}

  std::size_t line_;
};

}  // namespace mavg
