/*
 * Copyright 2026 The pimolap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pimolap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An index (row, column, page, crossbar) outside the addressed structure.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// A malformed argument: aliasing columns, bad spec, width mismatch.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Module, row or scratch capacity exhausted.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A PIM request targeted a page whose controller is still executing.
class PageBusyError : public Error {
 public:
  using Error::Error;
};

/// Model tables are missing, incomplete or cannot be fitted.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Query text could not be parsed. Carries a 1-based line/column.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// File I/O or on-disk format problem.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace pimolap
