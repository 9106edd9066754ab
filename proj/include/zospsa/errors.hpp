// Copyright 2026 The zospsa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZOSPSA_ERRORS_HPP_
#define ZOSPSA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace zospsa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: bad index, non-finite vector, empty batch.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values (epsilon <= 0, trial counts too small, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The requested quantity is undefined at this input (zero matrix, zero
/// gradient, minimizer reached).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A diagnostics prerequisite is missing or non-positive.
class DiagnosticsError : public Error {
 public:
  using Error::Error;
};

/// The iterate left the finite region or exceeded the divergence radius.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace zospsa

#endif  // ZOSPSA_ERRORS_HPP_
