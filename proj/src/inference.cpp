#include "robreg/inference.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "robreg/errors.hpp"
#include "robreg/quadrature.hpp"

namespace robreg {

namespace {

double unit_gaussian_density(double w) {
  return std::exp(-0.5 * w * w) / std::sqrt(2.0 * std::numbers::pi);
}

// Density of law / scale(), i.e. with unit scale parameter.
double unit_density(const ErrorLaw& law, double w) {
  switch (law.kind()) {
    case ErrorLaw::Kind::Gaussian:
      return unit_gaussian_density(w);
    case ErrorLaw::Kind::Cauchy:
      return 1.0 / (std::numbers::pi * (1.0 + w * w));
    case ErrorLaw::Kind::ContaminatedGaussian: {
      const double K = law.inflation();
      return (1.0 - law.eps()) * unit_gaussian_density(w) +
             law.eps() * unit_gaussian_density(w / K) / K;
    }
  }
  return 0.0;
}

// Root of a nonincreasing function; returns s with |fn(s)| <= tol or a
// bracket of relative width 1e-15.
template <typename F>
double solve_decreasing(F&& fn, double start, double tol) {
  double lo = start, hi = start;
  double flo = fn(lo), fhi = flo;
  int guard = 0;
  if (flo > 0.0) {
    while (fhi > 0.0) {
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      fhi = fn(hi);
      if (++guard > 200) throw NumericalError("population root: no upper bracket");
    }
  } else {
    while (flo <= 0.0) {
      hi = lo;
      fhi = flo;
      lo *= 0.5;
      flo = fn(lo);
      if (++guard > 200) throw NumericalError("population root: no lower bracket");
    }
  }
  int side = 0;
  for (int it = 0; it < 300; ++it) {
    double s = hi - fhi * (hi - lo) / (fhi - flo);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    const double width = hi - lo;
    const double fs = fn(s);
    if (std::abs(fs) <= tol) return s;
    if (fs > 0.0) {
      lo = s;
      flo = fs;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = s;
      fhi = fs;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (hi - lo > 0.5 * width) {
      const double mid = 0.5 * (lo + hi);
      const double fm = fn(mid);
      if (std::abs(fm) <= tol) return mid;
      if (fm > 0.0) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
      side = 0;
    }
    if (hi - lo <= 1e-15 * hi) return 0.5 * (lo + hi);
  }
  throw NumericalError("population root: iteration limit");
}

}  // namespace

ErrorLaw::ErrorLaw(Kind kind, double scale, double eps, double inflation)
    : kind_(kind), scale_(scale), eps_(eps), inflation_(inflation) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("ErrorLaw: scale must be positive");
  }
  if (!(eps >= 0.0 && eps < 0.5)) throw ConfigError("ErrorLaw: eps must lie in [0, 0.5)");
  if (!(inflation > 0.0)) throw ConfigError("ErrorLaw: K must be positive");
}

ErrorLaw ErrorLaw::gaussian(double sigma) { return {Kind::Gaussian, sigma, 0.0, 1.0}; }
ErrorLaw ErrorLaw::cauchy(double gamma) { return {Kind::Cauchy, gamma, 0.0, 1.0}; }
ErrorLaw ErrorLaw::contaminated_gaussian(double sigma, double eps, double K) {
  return {Kind::ContaminatedGaussian, sigma, eps, K};
}

double ErrorLaw::density(double u) const {
  return unit_density(*this, u / scale_) / scale_;
}

double ErrorLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Gaussian:
      return std::normal_distribution<double>(0.0, scale_)(rng);
    case Kind::Cauchy:
      return std::cauchy_distribution<double>(0.0, scale_)(rng);
    case Kind::ContaminatedGaussian: {
      const bool wide = rng.uniform() < eps_;
      const double sd = wide ? scale_ * inflation_ : scale_;
      return std::normal_distribution<double>(0.0, sd)(rng);
    }
  }
  return 0.0;
}

ErrorLaw ErrorLaw::scaled(double lambda) const {
  return {kind_, scale_ * lambda, eps_, inflation_};
}

double expect_even(const ErrorLaw& law, const std::function<double(double)>& h,
                   double kink) {
  const double sigma = law.scale();
  auto integrand = [&](double w) { return h(sigma * w) * unit_density(law, w); };
  QuadratureOptions opt;
  double total = 0.0;
  auto add = [&](const QuadratureResult& r) {
    if (!r.converged) throw NumericalError("expect_even: quadrature did not converge");
    total += r.value;
  };
  const double w_kink = kink / sigma;
  if (w_kink > 0.0 && std::isfinite(w_kink)) {
    add(integrate(integrand, 0.0, w_kink, opt));
    add(integrate_upper_tail(integrand, w_kink, opt));
  } else {
    add(integrate_upper_tail(integrand, 0.0, opt));
  }
  return 2.0 * total;
}

double population_scale(const MScaleSpec& spec, const ErrorLaw& law) {
  spec.validate();
  const RhoKernel& k = spec.rho0;
  auto fn = [&](double s) {
    const double kink = k.has_compact_support() ? k.c() * s : 0.0;
    return expect_even(law, [&](double u) { return k.rho_unchecked(u / s); }, kink) -
           spec.b;
  };
  return solve_decreasing(fn, law.scale(), 1e-12);
}

AsymptoticMoments asymptotic_moments(const RhoKernel& k, double s0,
                                     const ErrorLaw& law) {
  if (!(s0 > 0.0)) throw DomainError("asymptotic_moments: s0 must be positive");
  const double kink = k.has_compact_support() ? k.c() * s0 : 0.0;
  AsymptoticMoments m;
  m.a = expect_even(law, [&](double u) {
    const double v = k.psi(u / s0);
    return v * v;
  }, kink);
  m.b = expect_even(law, [&](double u) { return k.psi_prime(u / s0); }, kink);
  if (!(m.b > 1e-10)) {
    throw AssumptionViolation("asymptotic_moments: E psi'(u/s0) is not positive");
  }
  return m;
}

double expected_shifted_loss(const RhoKernel& k, const ErrorLaw& law, double v,
                             double s) {
  if (!(s > 0.0)) throw DomainError("expected_shifted_loss: s must be positive");
  const double sigma = law.scale();
  auto integrand = [&](double w) {
    return k.rho_unchecked((sigma * w - v) / s) * unit_density(law, w);
  };
  std::vector<double> cuts{0.0, v / sigma};
  if (k.has_compact_support()) {
    cuts.push_back((v - k.c() * s) / sigma);
    cuts.push_back((v + k.c() * s) / sigma);
  }
  return integrate_real_line(integrand, cuts);
}

double expected_shifted_loss_dv(const RhoKernel& k, const ErrorLaw& law,
                                double v, double s) {
  if (!(s > 0.0)) throw DomainError("expected_shifted_loss_dv: s must be positive");
  const double sigma = law.scale();
  auto integrand = [&](double w) {
    return k.psi((sigma * w - v) / s) * unit_density(law, w);
  };
  std::vector<double> cuts{0.0, v / sigma};
  if (k.has_compact_support()) {
    cuts.push_back((v - k.c() * s) / sigma);
    cuts.push_back((v + k.c() * s) / sigma);
  }
  return -integrate_real_line(integrand, cuts) / s;
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
}

ContrastInference contrast_inference(const RegressionProblem& problem,
                                     const FitResult& fit, const RhoKernel& rho1,
                                     const Vector& a_n, double level,
                                     const MomentsSource& source) {
  if (a_n.size() != problem.p()) throw ConfigError("contrast_inference: a_n has wrong size");
  const double norm = a_n.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ConfigError("contrast_inference: a_n must be a nonzero finite vector");
  }
  const double z = normal_critical_value(level);

  ContrastInference out;
  out.a_n = a_n / norm;
  out.level = level;
  out.estimate = out.a_n.dot(fit.beta);

  Eigen::LDLT<Matrix> ldlt(problem.gram());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw DegenerateDesignError("contrast_inference: Gram matrix is not invertible");
  }
  const double r2 = out.a_n.dot(ldlt.solve(out.a_n));
  if (!(r2 > 0.0) || !std::isfinite(r2)) {
    throw DegenerateDesignError("contrast_inference: a_n^T Sigma^-1 a_n is not positive");
  }
  out.r_n = std::sqrt(r2);

  double a_hat = 0.0, b_hat = 0.0, scale = 0.0;
  if (const auto* q = std::get_if<QuadratureMoments>(&source)) {
    const AsymptoticMoments m = asymptotic_moments(rho1, q->s0, q->law);
    a_hat = m.a;
    b_hat = m.b;
    scale = q->s0;
  } else {
    if (!(fit.scale > 0.0)) {
      throw AssumptionViolation("contrast_inference: fitted scale is zero");
    }
    const Vector r = problem.residuals(fit.beta);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double t = r(i) / fit.scale;
      const double psi = rho1.psi(t);
      a_hat += psi * psi;
      b_hat += rho1.psi_prime(t);
    }
    a_hat /= static_cast<double>(r.size());
    b_hat /= static_cast<double>(r.size());
    scale = fit.scale;
  }
  if (!(b_hat > 1e-6)) {
    throw AssumptionViolation("contrast_inference: near-singular information (b <= 1e-6)");
  }
  if (!(a_hat > 0.0)) {
    throw AssumptionViolation("contrast_inference: E psi^2 is zero");
  }
  out.std_error = scale / b_hat * std::sqrt(a_hat) * out.r_n /
                  std::sqrt(static_cast<double>(problem.n()));
  out.ci_low = out.estimate - z * out.std_error;
  out.ci_high = out.estimate + z * out.std_error;
  return out;
}

}  // namespace robreg
