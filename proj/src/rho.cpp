#include "robreg/rho.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

#include "robreg/errors.hpp"

namespace robreg {

namespace {

void require_finite(double x) {
  if (!std::isfinite(x)) throw DomainError("rho kernel: non-finite argument");
}

}  // namespace

RhoKernel::RhoKernel(RhoFamily family, double c) : family_(family), c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("rho kernel: tuning constant must be positive and finite");
  }
}

double RhoKernel::rho_unchecked(double x) const noexcept {
  const double t = x / c_;
  const double t2 = t * t;
  switch (family_) {
    case RhoFamily::Bisquare: {
      if (t2 >= 1.0) return 1.0;
      const double v = 1.0 - t2;
      return 1.0 - v * v * v;
    }
    case RhoFamily::Quartic: {
      if (t2 >= 1.0) return 1.0;
      const double v = 1.0 - t2;
      const double v2 = v * v;
      return 1.0 - v2 * v2;
    }
    case RhoFamily::ExpSquared:
      return -std::expm1(-t2);
  }
  return 1.0;
}

double RhoKernel::weight_unchecked(double x) const noexcept {
  const double t = x / c_;
  const double t2 = t * t;
  const double inv_c2 = 1.0 / (c_ * c_);
  switch (family_) {
    case RhoFamily::Bisquare: {
      if (t2 >= 1.0) return 0.0;
      const double v = 1.0 - t2;
      return 6.0 * v * v * inv_c2;
    }
    case RhoFamily::Quartic: {
      if (t2 >= 1.0) return 0.0;
      const double v = 1.0 - t2;
      return 8.0 * v * v * v * inv_c2;
    }
    case RhoFamily::ExpSquared:
      return 2.0 * std::exp(-t2) * inv_c2;
  }
  return 0.0;
}

double RhoKernel::rho(double x) const {
  require_finite(x);
  return rho_unchecked(x);
}

double RhoKernel::psi(double x) const {
  require_finite(x);
  const double t = x / c_;
  const double t2 = t * t;
  switch (family_) {
    case RhoFamily::Bisquare: {
      if (t2 >= 1.0) return 0.0;
      const double v = 1.0 - t2;
      return 6.0 * t * v * v / c_;
    }
    case RhoFamily::Quartic: {
      if (t2 >= 1.0) return 0.0;
      const double v = 1.0 - t2;
      return 8.0 * t * v * v * v / c_;
    }
    case RhoFamily::ExpSquared:
      return 2.0 * t * std::exp(-t2) / c_;
  }
  return 0.0;
}

double RhoKernel::psi_prime(double x) const {
  require_finite(x);
  const double t = x / c_;
  const double t2 = t * t;
  const double inv_c2 = 1.0 / (c_ * c_);
  switch (family_) {
    case RhoFamily::Bisquare: {
      if (t2 >= 1.0) return 0.0;
      return 6.0 * (1.0 - t2) * (1.0 - 5.0 * t2) * inv_c2;
    }
    case RhoFamily::Quartic: {
      if (t2 >= 1.0) return 0.0;
      const double v = 1.0 - t2;
      return 8.0 * v * v * (1.0 - 7.0 * t2) * inv_c2;
    }
    case RhoFamily::ExpSquared:
      return 2.0 * (1.0 - 2.0 * t2) * std::exp(-t2) * inv_c2;
  }
  return 0.0;
}

double RhoKernel::psi_double_prime(double x) const {
  require_finite(x);
  if (!is_c3()) {
    throw CapabilityError(
        "psi_double_prime: bisquare is not three times continuously "
        "differentiable at +-c");
  }
  const double t = x / c_;
  const double t2 = t * t;
  const double inv_c3 = 1.0 / (c_ * c_ * c_);
  switch (family_) {
    case RhoFamily::Quartic: {
      if (t2 >= 1.0) return 0.0;
      return 8.0 * t * (1.0 - t2) * (42.0 * t2 - 18.0) * inv_c3;
    }
    case RhoFamily::ExpSquared:
      return 2.0 * t * (4.0 * t2 - 6.0) * std::exp(-t2) * inv_c3;
    case RhoFamily::Bisquare:
      break;
  }
  return 0.0;
}

double RhoKernel::irls_weight(double x) const {
  require_finite(x);
  return weight_unchecked(x);
}

std::string_view family_name(RhoFamily family) {
  switch (family) {
    case RhoFamily::Bisquare:
      return "bisquare";
    case RhoFamily::ExpSquared:
      return "expsq";
    case RhoFamily::Quartic:
      return "quartic";
  }
  return "unknown";
}

RhoKernel parse_kernel(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("kernel spec must look like family:c, got '" +
                      std::string(text) + "'");
  }
  const std::string_view name = text.substr(0, colon);
  const std::string_view value = text.substr(colon + 1);
  RhoFamily family;
  if (name == "bisquare") {
    family = RhoFamily::Bisquare;
  } else if (name == "quartic") {
    family = RhoFamily::Quartic;
  } else if (name == "expsq" || name == "exp_squared") {
    family = RhoFamily::ExpSquared;
  } else {
    throw ConfigError("unknown rho family '" + std::string(name) + "'");
  }
  double c = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), c);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("bad tuning constant '" + std::string(value) + "'");
  }
  return RhoKernel(family, c);
}

std::string to_string(const RhoKernel& k) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), k.c());
  return std::string(family_name(k.family())) + ':' + std::string(buf, res.ptr);
}

std::vector<AxiomViolation> verify_rho_axioms(
    const std::function<double(double)>& rho, std::span<const double> grid,
    double tol) {
  std::vector<AxiomViolation> out;
  auto flag = [&](RhoAxiom a, double x, std::string detail) {
    out.push_back({a, x, std::move(detail)});
  };

  const double r0 = rho(0.0);
  if (std::abs(r0) > tol) flag(RhoAxiom::ZeroAtOrigin, 0.0, "rho(0) != 0");

  std::vector<double> mags;
  mags.reserve(grid.size() + 1);
  mags.push_back(0.0);
  for (double x : grid) {
    const double a = rho(x);
    const double b = rho(-x);
    if (std::abs(a - b) > tol) flag(RhoAxiom::Even, x, "rho(x) != rho(-x)");
    if (!(a >= -tol && a <= 1.0 + tol)) {
      flag(RhoAxiom::Bounded, x, "rho(x) outside [0, 1]");
    }
    mags.push_back(std::abs(x));
  }
  std::sort(mags.begin(), mags.end());
  // Grid points that agree to rounding are one magnitude.
  mags.erase(std::unique(mags.begin(), mags.end(),
                         [](double a, double b) { return b - a <= 1e-12 * std::max(1.0, b); }),
             mags.end());

  double prev = rho(mags.front());
  for (std::size_t i = 1; i < mags.size(); ++i) {
    const double cur = rho(mags[i]);
    if (cur < prev - tol) {
      flag(RhoAxiom::Monotone, mags[i], "rho decreases in |x|");
    } else if (cur < 1.0 - tol && !(cur > prev)) {
      flag(RhoAxiom::StrictIncrease, mags[i],
           "rho not strictly increasing below its supremum");
    }
    prev = cur;
  }
  return out;
}

std::vector<AxiomViolation> verify_rho_axioms(const RhoKernel& k,
                                              std::span<const double> grid,
                                              double tol) {
  return verify_rho_axioms([&k](double x) { return k.rho(x); }, grid, tol);
}

double max_dominance_gap(const RhoKernel& rho1, const RhoKernel& rho0,
                         int grid_points) {
  // Both losses are even; past 10 * max(c) every family is within 1e-40 of 1.
  const double hi = 10.0 * std::max(rho1.c(), rho0.c());
  double gap = -1.0;
  for (int i = 0; i <= grid_points; ++i) {
    const double x = hi * static_cast<double>(i) / grid_points;
    gap = std::max(gap, rho1.rho(x) - rho0.rho(x));
  }
  return gap;
}

}  // namespace robreg
