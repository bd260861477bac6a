#pragma once

#include <stdexcept>
#include <string>

namespace foldsense {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or vector shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An exact enumeration would exceed its configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Generation or solver parameters are inconsistent with each other.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An iteration left the region where its numerics are meaningful.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A constrained problem has no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; the message carries the stage tag.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Configuration files or command-line overrides are invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace foldsense
