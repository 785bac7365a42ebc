#pragma once

#include "robreg/problem.hpp"
#include "robreg/rho.hpp"
#include "robreg/s_estimator.hpp"

namespace robreg {

struct MMFitConfig {
  RhoKernel rho1 = RhoKernel::bisquare(4.685);
  int max_iter = 100;
  /// Stop when ||X (beta_new - beta)|| / (sqrt(n) s) falls below this.
  double beta_tol = 1e-10;
  /// Stop when the objective decrease falls below objective_tol * max(1, L).
  double objective_tol = 1e-12;
  int max_halvings = 30;

  void validate() const;
};

/// L_n(beta) = sum rho1((y_i - x_i^T beta) / s). Throws DomainError if s <= 0.
double objective_ln(const RegressionProblem& problem, const RhoKernel& rho1,
                    const Vector& beta, double s);

/// sum psi1(r_i / s) x_i, the estimating-equation residual at beta.
Vector score_vector(const RegressionProblem& problem, const RhoKernel& rho1,
                    const Vector& beta, double s);

/// Minimizes L_n for a frozen scale s by IRLS with step halving; every
/// accepted iterate weakly decreases L_n. Unconverged runs are returned with
/// converged = false. Throws DegenerateDesignError on a singular weighted
/// system at the first iterate.
FitResult fit_mm_given_scale(const RegressionProblem& problem,
                             const MMFitConfig& config, const Vector& beta_init,
                             double s);

/// S fit for the initial estimate and scale followed by fit_mm_given_scale.
/// Throws ConfigError unless rho1 <= rho0 on a 10^4-point grid.
FitResult fit_mm(const RegressionProblem& problem, const SFitConfig& s_config,
                 const MMFitConfig& mm_config);

/// Throws ConfigError if rho1 exceeds rho0 anywhere on the check grid.
void require_dominated(const RhoKernel& rho1, const RhoKernel& rho0);

}  // namespace robreg
