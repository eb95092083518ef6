// Copyright 2026 The MACE Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mace {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad shapes, unparsable files, invalid configuration.
/// The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Arithmetic failure: a value outside an operator's domain, a non-finite
/// activation, or a diverging optimizer. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidKernelError : public DataError {
 public:
  using DataError::DataError;
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

/// Input element outside the domain of a negative-power convolution.
class DomainError : public NumericalError {
 public:
  DomainError(const std::string& what, std::size_t index)
      : NumericalError(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::size_t epoch)
      : NumericalError(what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace mace
