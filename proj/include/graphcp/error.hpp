#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graphcp {

/// Base of every error caused by bad input (exit status 1 in the CLI).
/// Anything else escaping the library is treated as a runtime failure.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidStateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidLagError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IngestError : public ValidationError {
 public:
  IngestError(const std::string& what, std::size_t row)
      : ValidationError("row " + std::to_string(row) + ": " + what), row_(row) {}
  explicit IngestError(const std::string& what) : ValidationError(what) {}

  /// 1-based line number in the offending file, 0 when not tied to a row.
  std::size_t row() const { return row_; }

 private:
  std::size_t row_ = 0;
};

}  // namespace graphcp
