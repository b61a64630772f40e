#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace arpen {

/// Broad failure category. The CLI maps these onto exit codes.
enum class ErrorKind { Config, Data, Dimension, Numerical };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DimensionError : public Error {
public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Dimension, what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Raised by the coefficient update when the penalized Gram matrix is
/// rank deficient. `columns` holds design-column indices that could not be
/// resolved.
class SingularSystemError : public NumericalError {
public:
  SingularSystemError(const std::string& what, std::vector<int> columns)
      : NumericalError(what), columns_(std::move(columns)) {}

  const std::vector<int>& columns() const noexcept { return columns_; }

private:
  std::vector<int> columns_;
};

}  // namespace arpen
