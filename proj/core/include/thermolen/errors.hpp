#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace thermolen {

/// Base of every error raised by the library. The message is prefixed with
/// "module::operation: " so front ends can report where a failure came from.
class Error : public std::runtime_error {
 public:
  Error(std::string_view where, const std::string& what)
      : std::runtime_error(std::string(where) + ": " + what), where_(where) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Malformed input: non-Hermitian operator, bad dimensions, bad config.
class ValidationError : public Error {
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (beta <= 0,
/// parameters outside a model chart, ...).
class DomainError : public Error {
  using Error::Error;
};

/// A required inverse does not exist (rank-deficient state, singular
/// restricted generator).
class SingularityError : public Error {
  using Error::Error;
};

/// Populations too small to be represented.
class UnderflowError : public Error {
  using Error::Error;
};

/// Generator and declared stationary state disagree.
class ModelConsistencyError : public Error {
  using Error::Error;
};

/// Metric too ill-conditioned to invert.
class ConditioningError : public Error {
  using Error::Error;
};

/// Quadrature or truncation cannot meet the requested tolerance.
class AccuracyError : public Error {
  using Error::Error;
};

/// Iterative solver (shooting, node escalation) failed to converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(std::string_view where, const std::string& what, double best_residual)
      : Error(where, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Time integration broke an invariant (positivity, step underflow).
class IntegratorError : public Error {
  using Error::Error;
};

/// Trajectory left the admissible parameter domain.
class DomainExitError : public DomainError {
 public:
  DomainExitError(std::string_view where, const std::string& what, double exit_time)
      : DomainError(where, what), exit_time_(exit_time) {}

  double exit_time() const noexcept { return exit_time_; }

 private:
  double exit_time_;
};

/// Non-fatal diagnostics (Hermiticity drift and similar) go through this sink.
/// The default sink writes to stderr. Thread-safe.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace thermolen
