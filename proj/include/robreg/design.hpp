#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "robreg/problem.hpp"

namespace robreg {

struct SpectrumBounds {
  double rho1n = 0.0;  ///< smallest eigenvalue of Sigma_n
  double rho2n = 0.0;  ///< largest eigenvalue of Sigma_n
};

/// Extreme eigenvalues of Sigma_n = X^T X / n.
SpectrumBounds spectrum_bounds(const Matrix& X);

/// Subset size [n alpha] used by eta_n(alpha).
Eigen::Index subset_size(Eigen::Index n, double alpha);

/// k-th smallest |x_i^T theta|: the inner min over subsets of the
/// eta_n(alpha) definition for a fixed direction.
double order_statistic(const Matrix& X, const Vector& theta, Eigen::Index k);

struct EtaBounds {
  double lower = 0.0;
  double upper = 0.0;
  /// Exact value when the design is small enough (p <= 2, C(n, k) <= 1e5).
  std::optional<double> exact;
  /// True when `lower` is a proven bound (p <= 2); otherwise it is the
  /// adversarial-subset eigenvalue estimate.
  bool lower_certified = false;
};

/// Bounds on eta_n(alpha) = min_{|A|=[n alpha]} min_{|theta|=1} max_{i in A} |x_i^T theta|.
///
/// upper: minimum of order_statistic over sampled unit directions, including
///   directions orthogonal to random (p-1)-subsets of rows.
/// lower: p == 1 exact; p == 2 a net bound min_net - max|x_i| * pi / (2 N);
///   p >= 3 sqrt of the smallest eigenvalue of Sigma(A) over the adversarial
///   subsets A of the best directions (heuristic).
EtaBounds eta_n_bounds(const Matrix& X, double alpha, int n_directions,
                       std::uint64_t seed);

/// Exact eta_n(alpha) for p <= 2 by minimizing the order statistic over all
/// critical directions (orthogonal to x_i and to x_i +- x_j). Throws
/// ConfigError for p > 2.
double eta_n_exact(const Matrix& X, double alpha);

/// Smallest eigenvalue of (1/n) sum x_i x_i^T 1{|x_i| < eta1 sqrt(p)} - eta2 I.
double truncated_gram_check(const Matrix& X, double eta1, double eta2);

struct ConditionProbe {
  double c = 1.0;
  double C = 5.0;
  double delta = 0.1;
  int samples = 1000;
  int n_directions = 2000;
  std::uint64_t seed = 1;
};

struct DesignReport {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  double rho1n = 0.0;
  double rho2n = 0.0;
  bool singular = false;
  bool tau_ok = false;  ///< rho2n finite
  double tau_value = 0.0;
  double x1a_value = 0.0;  ///< (1/n) sum |x_i|^2 / p
  double x1b_value = 0.0;  ///< max |x_i| / n
  double x6_ratio = 0.0;   ///< max |x_i|^2 p^2 / n
  double alpha = 0.0;
  double eta_lower = 0.0;
  double eta_upper = 0.0;
  bool eta_lower_certified = false;
  std::optional<double> eta_exact;
  double b = 0.0;
  bool x0_ok = false;  ///< p < [n (1 - b)]
  double eta1 = 0.0;   ///< sqrt(2 M / (1 - alpha)) with M = x1a_value
  double truncated_gram_mineig = 0.0;
  /// Largest eta2 on the grid 2^-k (k = 0..30) with a positive truncated
  /// Gram check, 0 if none.
  double eta2_max_passing = 0.0;
  /// Monte Carlo probes of the local design conditions: over sampled
  /// beta in B(delta), z on the unit sphere, with J = I(beta, c) cap I(z, C),
  /// min of sum_{J} (x_i^T z)^2 / n and max of sum_{not J} (x_i^T z)^2 / n.
  double x4_probe_min = 0.0;
  double x5_probe_max = 0.0;
  ConditionProbe probe;
};

DesignReport check_conditions(const Matrix& X, double b, double alpha,
                              const ConditionProbe& probe = {});

nlohmann::json to_json(const DesignReport& report);

}  // namespace robreg
