#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tarifflab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: wrong dimensions, invalid configuration, malformed files.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  DimensionMismatch(const std::string& what, std::size_t expected, std::size_t actual);
};

class InvalidArgument : public InputError {
 public:
  using InputError::InputError;
};

/// A demand model, scenario set or tariff violates one of its invariants.
class InvalidModel : public InputError {
 public:
  using InputError::InputError;
};

class ZeroExpectedDemand : public Error {
 public:
  ZeroExpectedDemand(std::size_t period, double value);
  std::size_t period() const noexcept { return period_; }

 private:
  std::size_t period_;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

/// Revenue target above what the tariff family can raise.
class InfeasibleTarget : public Error {
 public:
  InfeasibleTarget(double target, double lowest, double highest);
  double target() const noexcept { return target_; }
  double lowest() const noexcept { return lowest_; }
  double highest() const noexcept { return highest_; }

 private:
  double target_;
  double lowest_;
  double highest_;
};

/// Revenue target below the surplus of the optimal two-part price.
class InvalidRegime : public Error {
 public:
  InvalidRegime(double target, double lowest);
  double target() const noexcept { return target_; }
  double lowest() const noexcept { return lowest_; }

 private:
  double target_;
  double lowest_;
};

class EmptyFeasibleSet : public Error {
 public:
  using Error::Error;
};

class TooFewPoints : public Error {
 public:
  TooFewPoints(std::size_t have, std::size_t need);
};

// ingest

class MalformedRow : public InputError {
 public:
  MalformedRow(const std::string& source, std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingHour : public InputError {
 public:
  MissingHour(const std::string& source, long day, long hour);
  long day() const noexcept { return day_; }
  long hour() const noexcept { return hour_; }

 private:
  long day_;
  long hour_;
};

class NonFiniteValue : public InputError {
 public:
  NonFiniteValue(const std::string& source, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class AlignmentMismatch : public InputError {
 public:
  using InputError::InputError;
};

class SingleScenario : public InputError {
 public:
  SingleScenario();
};

class NonPositiveLoad : public InputError {
 public:
  using InputError::InputError;
};

class ScaleNonPositive : public InputError {
 public:
  explicit ScaleNonPositive(double elasticity);
};

/// Model file syntax or schema problem.
class ModelFormatError : public InputError {
 public:
  ModelFormatError(const std::string& source, std::size_t line, const std::string& reason);
};

}  // namespace tarifflab
