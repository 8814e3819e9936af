// SPDX-License-Identifier: Apache-2.0
//
// msloc - frequency-domain localization of uniformly moving tonal sources
// Copyright (C) 2026 The msloc contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace msloc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (grids, arrays, plans, selections).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Physical evaluation failed, e.g. a receiver lies on the source path.
class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& what, double time = 0.0)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Adaptive quadrature did not reach its tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : Error(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Linear-algebra failure (SVD, missing L-curve corner).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The L-curve has no convex corner on the supplied grid.
class NoCornerError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// File format, checksum or version problems.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace msloc
