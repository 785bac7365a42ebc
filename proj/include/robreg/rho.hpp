#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace robreg {

enum class RhoFamily { Bisquare, ExpSquared, Quartic };

/// Bounded, redescending loss rho(x) = rho_unit(x / c) with sup rho = 1.
///
/// Unit forms (t = x / c):
///   Bisquare    1 - (1 - t^2)^3 on |t| <= 1, else 1
///   Quartic     1 - (1 - t^2)^4 on |t| <= 1, else 1
///   ExpSquared  1 - exp(-t^2)
///
/// Derivatives are taken with respect to x. Bisquare is only C^2 at +-c, so
/// psi_double_prime is unavailable for it.
class RhoKernel {
 public:
  RhoKernel(RhoFamily family, double c);

  static RhoKernel bisquare(double c) { return {RhoFamily::Bisquare, c}; }
  static RhoKernel quartic(double c) { return {RhoFamily::Quartic, c}; }
  static RhoKernel exp_squared(double c) { return {RhoFamily::ExpSquared, c}; }

  RhoFamily family() const noexcept { return family_; }
  double c() const noexcept { return c_; }

  /// True when rho is exactly 1 for |x| >= c.
  bool has_compact_support() const noexcept {
    return family_ != RhoFamily::ExpSquared;
  }
  /// True when rho is three times continuously differentiable.
  bool is_c3() const noexcept { return family_ != RhoFamily::Bisquare; }

  double rho(double x) const;
  double psi(double x) const;
  double psi_prime(double x) const;
  double psi_double_prime(double x) const;
  /// psi(x) / x, extended continuously by psi'(0) at the origin.
  double irls_weight(double x) const;

  /// Unchecked evaluators for inner loops; x must be finite.
  double rho_unchecked(double x) const noexcept;
  double weight_unchecked(double x) const noexcept;

  friend bool operator==(const RhoKernel&, const RhoKernel&) = default;

 private:
  RhoFamily family_;
  double c_;
};

std::string_view family_name(RhoFamily family);

/// Parses "family:c", e.g. "bisquare:1.547". Throws ConfigError.
RhoKernel parse_kernel(std::string_view text);
std::string to_string(const RhoKernel& k);

enum class RhoAxiom { ZeroAtOrigin, Even, Monotone, StrictIncrease, Bounded };

struct AxiomViolation {
  RhoAxiom axiom;
  double x;
  std::string detail;
};

/// Checks the rho-function axioms of an arbitrary loss on a grid. An empty
/// result means every axiom held at every grid point.
std::vector<AxiomViolation> verify_rho_axioms(
    const std::function<double(double)>& rho, std::span<const double> grid,
    double tol = 1e-12);

std::vector<AxiomViolation> verify_rho_axioms(const RhoKernel& k,
                                              std::span<const double> grid,
                                              double tol = 1e-12);

/// Largest value of rho1(x) - rho0(x) over a grid of |x|; nonpositive
/// (within tol) means rho1 <= rho0.
double max_dominance_gap(const RhoKernel& rho1, const RhoKernel& rho0,
                         int grid_points = 10000);

}  // namespace robreg
