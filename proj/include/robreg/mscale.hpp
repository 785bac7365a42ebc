#pragma once

#include <span>

#include "robreg/rho.hpp"

namespace robreg {

/// Definition of an M-estimate of scale: the smallest s > 0 with
/// mean(rho0(u_i / s)) <= b.
struct MScaleSpec {
  RhoKernel rho0 = RhoKernel::bisquare(1.547);
  double b = 0.5;
  /// Stopping tolerance on |mean(rho0(u/s)) - b|.
  double rel_tol = 1e-12;
  int max_iter = 200;

  /// Throws ConfigError unless 0 < b < 1 and the tolerances are positive.
  void validate() const;
};

/// mean(rho0(u_i / s)) - b; nonincreasing in s. Throws DomainError for s <= 0.
double scale_equation(const MScaleSpec& spec, std::span<const double> u,
                      double s);

/// M-estimate of scale of u. Returns exactly 0 when at least (1 - b) n of the
/// entries are zero; otherwise a root of scale_equation.
///
/// Throws DomainError on empty or non-finite input and ConvergenceError if
/// the bracket does not collapse within max_iter iterations.
double m_scale(const MScaleSpec& spec, std::span<const double> u);

/// Same as m_scale, starting the bracket search at `hint` (> 0).
double m_scale(const MScaleSpec& spec, std::span<const double> u, double hint);

}  // namespace robreg
