#include "robreg/mscale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "robreg/errors.hpp"

namespace robreg {

namespace {

double mean_rho(const RhoKernel& k, std::span<const double> u, double s) {
  const double inv = 1.0 / s;
  double acc = 0.0;
  for (double v : u) acc += k.rho_unchecked(v * inv);
  return acc / static_cast<double>(u.size());
}

// Returns 0 for the degenerate branch, -1 when a positive root exists.
double check_input(const MScaleSpec& spec, std::span<const double> u) {
  if (u.empty()) throw DomainError("m_scale: empty residual vector");
  std::size_t zeros = 0;
  for (double v : u) {
    if (!std::isfinite(v)) throw DomainError("m_scale: non-finite residual");
    if (v == 0.0) ++zeros;
  }
  const double n = static_cast<double>(u.size());
  if (static_cast<double>(zeros) >= (1.0 - spec.b) * n) return 0.0;
  return -1.0;
}

double solve(const MScaleSpec& spec, std::span<const double> u, double start) {
  const RhoKernel& k = spec.rho0;
  auto g = [&](double s) { return mean_rho(k, u, s) - spec.b; };

  // g > 0 at lo, g <= 0 at hi.
  double lo = start;
  double hi = start;
  double glo = g(lo);
  double ghi = glo;
  int guard = 0;
  if (glo > 0.0) {
    do {
      lo = hi;
      glo = ghi;
      hi *= 2.0;
      ghi = g(hi);
      if (++guard > 2100) throw ConvergenceError("m_scale: no upper bracket", lo, hi);
    } while (ghi > 0.0);
  } else {
    do {
      hi = lo;
      ghi = glo;
      lo *= 0.5;
      glo = g(lo);
      if (++guard > 2100) throw ConvergenceError("m_scale: no lower bracket", lo, hi);
    } while (glo <= 0.0);
  }
  if (ghi == 0.0) return hi;

  // Illinois-modified regula falsi with bisection fallback.
  int side = 0;
  double best = hi;
  double gbest = ghi;
  for (int it = 0; it < spec.max_iter; ++it) {
    double s = hi - ghi * (hi - lo) / (ghi - glo);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    const double gs = g(s);
    if (std::abs(gs) < std::abs(gbest)) {
      best = s;
      gbest = gs;
    }
    const double width = hi - lo;
    if (gs == 0.0) return s;
    if (gs > 0.0) {
      lo = s;
      glo = gs;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = s;
      ghi = gs;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
    // Plain bisection when an interpolation step made little progress.
    if (hi - lo > 0.5 * width) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (std::abs(gm) < std::abs(gbest)) {
        best = mid;
        gbest = gm;
      }
      if (gm == 0.0) return mid;
      if (gm > 0.0) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
        ghi = gm;
      }
      side = 0;
    }
    const bool tight = hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * hi;
    if (tight || (gbest == 0.0)) {
      return best;
    }
  }
  if (std::abs(gbest) <= spec.rel_tol) return best;
  throw ConvergenceError("m_scale: max_iter exceeded", lo, hi);
}

double initial_guess(const MScaleSpec& spec, std::span<const double> u) {
  std::vector<double> a(u.size());
  std::transform(u.begin(), u.end(), a.begin(),
                 [](double v) { return std::abs(v); });
  auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
  std::nth_element(a.begin(), mid, a.end());
  double guess = *mid;
  if (!(guess > 0.0)) guess = *std::max_element(a.begin(), a.end());
  return guess / spec.rho0.c() * 2.0;
}

}  // namespace

void MScaleSpec::validate() const {
  if (!(b > 0.0 && b < 1.0)) throw ConfigError("MScaleSpec: b must lie in (0, 1)");
  if (!(rel_tol > 0.0)) throw ConfigError("MScaleSpec: rel_tol must be positive");
  if (max_iter <= 0) throw ConfigError("MScaleSpec: max_iter must be positive");
}

double scale_equation(const MScaleSpec& spec, std::span<const double> u,
                      double s) {
  if (!(s > 0.0)) throw DomainError("scale_equation: s must be positive");
  if (u.empty()) throw DomainError("scale_equation: empty residual vector");
  return mean_rho(spec.rho0, u, s) - spec.b;
}

double m_scale(const MScaleSpec& spec, std::span<const double> u) {
  spec.validate();
  if (check_input(spec, u) == 0.0) return 0.0;
  return solve(spec, u, initial_guess(spec, u));
}

double m_scale(const MScaleSpec& spec, std::span<const double> u, double hint) {
  spec.validate();
  if (check_input(spec, u) == 0.0) return 0.0;
  if (!(hint > 0.0) || !std::isfinite(hint)) return solve(spec, u, initial_guess(spec, u));
  return solve(spec, u, hint);
}

}  // namespace robreg
