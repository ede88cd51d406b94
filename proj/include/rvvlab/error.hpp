// Copyright 2026 The rvvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace rvvlab {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid machine, kernel, blocking or cache configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A block or index falls outside the matrix it refers to.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// LU factorization met an exactly zero pivot column.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t column)
      : Error("matrix is singular: zero pivot in column " +
              std::to_string(column)),
        column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Malformed input file (trace, matrix, memory image).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace rvvlab
