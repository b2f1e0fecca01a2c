#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fregls {

/// Malformed input data (CSV/config). Carries the offending line/column.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column = 0)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) +
                                           (column ? ", column " + std::to_string(column) : "") +
                                           ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Numerical failure: rank deficiency, non positive definite covariance, ...
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace fregls
