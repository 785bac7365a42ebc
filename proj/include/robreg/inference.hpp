#pragma once

#include <variant>

#include "robreg/mscale.hpp"
#include "robreg/problem.hpp"
#include "robreg/rho.hpp"
#include "robreg/rng.hpp"

namespace robreg {

/// Symmetric unimodal error distribution.
class ErrorLaw {
 public:
  enum class Kind { Gaussian, Cauchy, ContaminatedGaussian };

  static ErrorLaw gaussian(double sigma);
  static ErrorLaw cauchy(double gamma);
  /// (1 - eps) N(0, sigma^2) + eps N(0, (K sigma)^2).
  static ErrorLaw contaminated_gaussian(double sigma, double eps, double K);

  Kind kind() const noexcept { return kind_; }
  /// sigma for the Gaussian kinds, gamma for Cauchy.
  double scale() const noexcept { return scale_; }
  double eps() const noexcept { return eps_; }
  double inflation() const noexcept { return inflation_; }

  double density(double u) const;
  double sample(Rng& rng) const;
  ErrorLaw scaled(double lambda) const;

 private:
  ErrorLaw(Kind kind, double scale, double eps, double inflation);
  Kind kind_;
  double scale_;
  double eps_;
  double inflation_;
};

/// E h(u) for an even integrand h with kinks at +-kink (kink <= 0: none).
double expect_even(const ErrorLaw& law, const std::function<double(double)>& h,
                   double kink);

/// Population M-scale s(F0): the positive root of E rho0(u / s) = b,
/// solved to |E rho0(u/s) - b| <= 1e-12.
double population_scale(const MScaleSpec& spec, const ErrorLaw& law);

struct AsymptoticMoments {
  double a = 0.0;  ///< E psi^2(u / s0)
  double b = 0.0;  ///< E psi'(u / s0)
  /// s0^2 a / b^2, the limiting variance of sqrt(n) r_n^{-1} a_n^T (beta - beta0).
  double variance(double s0) const { return s0 * s0 * a / (b * b); }
};

/// Throws AssumptionViolation if E psi'(u / s0) is not positive.
AsymptoticMoments asymptotic_moments(const RhoKernel& k, double s0,
                                     const ErrorLaw& law);

/// R(v, s) = E rho((u - v) / s).
double expected_shifted_loss(const RhoKernel& k, const ErrorLaw& law, double v,
                             double s);
/// d R(v, s) / dv = -E psi((u - v) / s) / s.
double expected_shifted_loss_dv(const RhoKernel& k, const ErrorLaw& law,
                                double v, double s);

struct PlugInEmpirical {};
struct QuadratureMoments {
  ErrorLaw law;
  double s0;
};
using MomentsSource = std::variant<PlugInEmpirical, QuadratureMoments>;

struct ContrastInference {
  Vector a_n;  ///< unit vector
  double r_n = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.0;
};

/// Two-sided standard normal critical value for the given coverage level.
double normal_critical_value(double level);

/// Wald interval for a_n^T beta from the asymptotic normal limit:
/// std_error = (s / b) sqrt(a) r_n / sqrt(n) with r_n^2 = a_n^T Sigma_n^{-1} a_n.
/// PlugInEmpirical uses the fitted scale and residual averages; the
/// quadrature source uses s0 and the law's moments.
ContrastInference contrast_inference(const RegressionProblem& problem,
                                     const FitResult& fit, const RhoKernel& rho1,
                                     const Vector& a_n, double level,
                                     const MomentsSource& source = PlugInEmpirical{});

}  // namespace robreg
