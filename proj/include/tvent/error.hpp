#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tvent {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A CSV cell or row could not be interpreted. Coordinates are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : Error("parse error at row " + std::to_string(row) + ", column " +
              std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// A dimension has max == min and cannot be mapped onto [-1, 1].
class DegenerateDimension : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A regime carries zero total affiliation weight.
class EmptyRegime : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// A series whose autocorrelation is undefined (zero variance).
class DegenerateSeries : public Error {
 public:
  using Error::Error;
};

/// A model or report document is malformed or has an unsupported schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tvent
