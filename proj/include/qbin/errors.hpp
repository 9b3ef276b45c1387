#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qbin {

/// Base class for every error surfaced by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative evaluation failed to converge.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double a, double x)
      : Error(what + " (a=" + std::to_string(a) + ", x=" + std::to_string(x) + ")"), a_(a), x_(x) {}

  double a() const noexcept { return a_; }
  double x() const noexcept { return x_; }

 private:
  double a_;
  double x_;
};

/// A caller broke a precondition that is not a pure domain restriction.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Too few samples to form an estimate or a proper posterior.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A measurement falls outside the support of the bins it is assigned to.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// A measurement carries no information about its bin (u collapses for every parameter value).
class DegenerateMeasurementError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " at line " + std::to_string(line)), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace qbin
