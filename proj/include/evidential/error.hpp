#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evidential {

/// Base of every diagnostic raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Design matrix is not of full column rank.
class RankError : public Error {
 public:
  RankError(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns_(std::move(columns)) {}

  /// Labels of the columns found to be linearly dependent on the others.
  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

/// Too few observations for the requested estimate (n <= r).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// The fitted residual variance is zero, so F and the evidence function are undefined.
class DegenerateVarianceError : public Error {
 public:
  using Error::Error;
};

/// Malformed comparison, design or layout specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be invertible or positive definite was not.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Integer search for a sample size ran past its cap.
class SearchExhaustedError : public Error {
 public:
  using Error::Error;
};

/// Root search found no sign change on its bracket.
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// A cell is too small for the stratified bootstrap.
class StratificationError : public Error {
 public:
  using Error::Error;
};

/// Input file could not be turned into a model frame.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Requested work exceeds a configured resource cap.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace evidential
