#pragma once

#include <stdexcept>
#include <string>

namespace rcb {

/// Raised when a statistic or solver is asked to work on an empty input.
class NoDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (e.g. a non-minimizing ahat).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed run configuration or command-line override.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset ingestion failure. Row and column are reported when known;
/// row is 1-based over the data lines (header excluded), 0 when unknown.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& message, std::size_t row = 0, std::string column = {})
      : std::runtime_error(format(message, row, column)), row_(row), column_(std::move(column)) {}

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t row, const std::string& column) {
    std::string out = message;
    if (!column.empty()) out += " [column '" + column + "']";
    if (row != 0) out += " [row " + std::to_string(row) + "]";
    return out;
  }

  std::size_t row_;
  std::string column_;
};

}  // namespace rcb
