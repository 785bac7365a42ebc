#pragma once

#include <functional>
#include <span>

namespace robreg {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 15-point Gauss-Kronrod on [a, b].
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& opt = {});

/// Integral over [a, inf) after the substitution x = a + t / (1 - t).
QuadratureResult integrate_upper_tail(const Integrand& f, double a,
                                      const QuadratureOptions& opt = {});

/// Integral over the real line, split at the sorted interior breakpoints
/// (kinks of the integrand). Throws NumericalError if any piece fails to
/// converge.
double integrate_real_line(const Integrand& f, std::span<const double> breakpoints,
                           const QuadratureOptions& opt = {});

}  // namespace robreg
