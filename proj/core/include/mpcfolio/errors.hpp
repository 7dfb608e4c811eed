#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mpcfolio {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not agree with the problem dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinite input where a finite number is required.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Parameters that violate a documented invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Portfolio wealth dropped to zero or below; the constraint set degenerates.
class WealthExhausted : public Error {
 public:
  explicit WealthExhausted(double wealth)
      : Error("portfolio wealth exhausted (V = " + std::to_string(wealth) + ")"),
        wealth_(wealth) {}
  double wealth() const noexcept { return wealth_; }

 private:
  double wealth_;
};

/// Regressor matrix of a VAR fit lacks full column rank.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, std::vector<int> assets)
      : Error(what), assets_(std::move(assets)) {}
  /// Zero-based asset columns whose lagged regressors are collinear.
  const std::vector<int>& assets() const noexcept { return assets_; }

 private:
  std::vector<int> assets_;
};

/// Malformed or inconsistent input data (price files, return matrices).
class DataError : public Error {
 public:
  DataError(const std::string& what, int line = -1) : Error(what), line_(line) {}
  /// One-based line number in the source file, or -1 when not file-bound.
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace mpcfolio
