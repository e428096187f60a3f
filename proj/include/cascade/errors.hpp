// Copyright 2026 The Cascade Transfer Authors
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

#ifndef CASCADE_ERRORS_HPP_
#define CASCADE_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cascade {

// Non-finite or otherwise malformed state.
class InvalidStateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidTrajectoryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Control input outside its admissible set (e.g. negative thrust).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Arguments outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// NaN/Inf produced during simulation or optimization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No (alpha, beta) satisfies the tracking recursion.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Transition kernel is deterministic, so total variation is degenerate.
class DegenerateKernelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or corrupt checkpoint / data file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace cascade

#endif  // CASCADE_ERRORS_HPP_
