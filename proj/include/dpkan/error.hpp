// Copyright 2026 The dpkan Authors
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

#ifndef DPKAN_ERROR_HPP
#define DPKAN_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dpkan {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument lies outside the operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or byte stream.
class ParseError : public Error {
 public:
  using Error::Error;
};

class VersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

class TruncationError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Structurally readable input whose declared dimensions are inconsistent.
class FormatShapeError : public ParseError {
 public:
  using ParseError::ParseError;
};

class MagicNumberError : public ParseError {
 public:
  using ParseError::ParseError;
};

class CountMismatchError : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingColumnError : public ParseError {
 public:
  using ParseError::ParseError;
};

class RaggedRowError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A CSV cell that does not parse as a number. Coordinates are 1-based data
/// row (header excluded) and 1-based column.
class NonNumericCellError : public ParseError {
 public:
  NonNumericCellError(std::size_t row, std::size_t col, const std::string& cell)
      : ParseError("non-numeric cell '" + cell + "' at (" + std::to_string(row) +
                   "," + std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::int64_t step)
      : Error("training diverged (non-finite loss) at step " + std::to_string(step)),
        step_(step) {}

  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

/// No noise multiplier in the search range reaches the requested epsilon.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// R^2 is undefined when the reference values have zero variance.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpkan

#endif  // DPKAN_ERROR_HPP
