#pragma once

#include <stdexcept>
#include <string>

namespace robreg {

/// Input outside the mathematical domain of an operation (non-finite value,
/// non-positive scale, empty sample).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested derivative or property is not available for a loss family.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Inconsistent or out-of-range configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative solver stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi) {}

  double bracket_lo;
  double bracket_hi;
};

/// Design matrix (or every candidate subsample of it) is singular.
class DegenerateDesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature or eigensolver failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A modelling assumption needed by an asymptotic formula does not hold.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace robreg
