#pragma once

#include <cstdint>

#include "robreg/mscale.hpp"
#include "robreg/problem.hpp"

namespace robreg {

struct SFitConfig {
  MScaleSpec mscale;
  int n_subsamples = 500;
  /// Candidates kept for full concentration.
  int n_keep = 5;
  /// Concentration steps for each kept candidate; the best one is then
  /// concentrated to convergence.
  int n_concentration = 20;
  /// Concentration of kept candidates stops once
  /// ||X (beta_new - beta)|| / (sqrt(n) s) falls below this. The winner is
  /// then refined to min(i_step_tol, 1e-12).
  double i_step_tol = 1e-8;
  /// Cheap concentration steps applied to every subsample candidate.
  int initial_steps = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ConcentrationStep {
  Vector beta;
  double scale = 0.0;
  /// False when the weighted system was singular or the step would have
  /// increased the scale; beta and scale are then the inputs.
  bool accepted = true;
};

/// One weighted least squares step with weights irls_weight(r_i / s). For
/// losses with rho(sqrt(t)) concave this never increases the residual
/// M-scale; the step is rejected if the scale grows by more than 1e-14
/// relative.
ConcentrationStep concentration_step(const RegressionProblem& problem,
                                     const MScaleSpec& mscale,
                                     const Vector& beta_in);

/// As above with the current scale already known.
ConcentrationStep concentration_step(const RegressionProblem& problem,
                                     const MScaleSpec& mscale,
                                     const Vector& beta_in, double scale_in);

/// S-estimator: minimizes the residual M-scale by random elemental
/// subsamples followed by concentration. The least squares fit is always
/// included as one extra candidate. objective == scale on return.
///
/// Throws ConfigError if p >= (1 - b) n and DegenerateDesignError if no
/// nonsingular subsample can be drawn.
FitResult fit_s(const RegressionProblem& problem, const SFitConfig& config);

/// Residual M-scale of y - X beta.
double residual_scale(const RegressionProblem& problem, const MScaleSpec& mscale,
                      const Vector& beta);

/// Throws ConfigError unless p < floor(n (1 - b)).
void require_scale_feasible(const RegressionProblem& problem, double b);

}  // namespace robreg
