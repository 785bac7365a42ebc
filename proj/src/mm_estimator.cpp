#include "robreg/mm_estimator.hpp"

#include <cmath>

#include "robreg/errors.hpp"

namespace robreg {

void MMFitConfig::validate() const {
  if (max_iter <= 0) throw ConfigError("MMFitConfig: max_iter must be positive");
  if (!(beta_tol > 0.0) || !(objective_tol > 0.0)) {
    throw ConfigError("MMFitConfig: tolerances must be positive");
  }
  if (max_halvings < 0) throw ConfigError("MMFitConfig: max_halvings must be >= 0");
}

double objective_ln(const RegressionProblem& problem, const RhoKernel& rho1,
                    const Vector& beta, double s) {
  if (!(s > 0.0)) throw DomainError("objective_ln: s must be positive");
  const Vector r = problem.residuals(beta);
  const double inv = 1.0 / s;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) acc += rho1.rho_unchecked(r(i) * inv);
  return acc;
}

Vector score_vector(const RegressionProblem& problem, const RhoKernel& rho1,
                    const Vector& beta, double s) {
  if (!(s > 0.0)) throw DomainError("score_vector: s must be positive");
  const Vector r = problem.residuals(beta);
  Vector psi(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) psi(i) = rho1.psi(r(i) / s);
  return problem.X().transpose() * psi;
}

void require_dominated(const RhoKernel& rho1, const RhoKernel& rho0) {
  const double gap = max_dominance_gap(rho1, rho0);
  if (gap > 1e-12) {
    throw ConfigError("rho1 <= rho0 fails: rho1 = " + to_string(rho1) +
                      " exceeds rho0 = " + to_string(rho0) + " by " +
                      std::to_string(gap));
  }
}

FitResult fit_mm_given_scale(const RegressionProblem& problem,
                             const MMFitConfig& config, const Vector& beta_init,
                             double s) {
  config.validate();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("fit_mm_given_scale: s must be positive and finite");
  }
  if (beta_init.size() != problem.p() || !beta_init.allFinite()) {
    throw DomainError("fit_mm_given_scale: beta_init has wrong size or is not finite");
  }
  const RhoKernel& k = config.rho1;
  const Matrix& X = problem.X();
  const Vector& y = problem.y();
  const double inv = 1.0 / s;
  const double sqrt_n = std::sqrt(static_cast<double>(problem.n()));

  FitResult out;
  Vector beta = beta_init;
  Vector r = y - X * beta;
  auto loss_of = [&](const Vector& res) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < res.size(); ++i) acc += k.rho_unchecked(res(i) * inv);
    return acc;
  };
  double loss = loss_of(r);
  out.trace.emplace_back(0, loss);

  Vector w(r.size());
  Vector target;
  for (int it = 1; it <= config.max_iter; ++it) {
    for (Eigen::Index i = 0; i < r.size(); ++i) w(i) = k.weight_unchecked(r(i) * inv);
    if (!weighted_least_squares(X, y, w, target)) {
      if (it == 1) {
        throw DegenerateDesignError("fit_mm_given_scale: singular weighted system");
      }
      break;
    }
    Vector step = target - beta;
    Vector candidate = target;
    Vector r_new = y - X * candidate;
    double loss_new = loss_of(r_new);
    int halvings = 0;
    while (loss_new > loss && halvings < config.max_halvings) {
      step *= 0.5;
      candidate = beta + step;
      r_new = y - X * candidate;
      loss_new = loss_of(r_new);
      ++halvings;
    }
    if (loss_new > loss) {
      // No descent direction left at floating point resolution.
      out.converged = true;
      break;
    }
    const double move = (r_new - r).norm() / (sqrt_n * s);
    const double drop = loss - loss_new;
    beta = std::move(candidate);
    r = std::move(r_new);
    loss = loss_new;
    out.iterations = it;
    out.trace.emplace_back(it, loss);
    if (move < config.beta_tol || drop <= config.objective_tol * std::max(1.0, loss)) {
      out.converged = true;
      break;
    }
  }
  out.beta = std::move(beta);
  out.scale = s;
  out.objective = loss;
  return out;
}

FitResult fit_mm(const RegressionProblem& problem, const SFitConfig& s_config,
                 const MMFitConfig& mm_config) {
  mm_config.validate();
  require_dominated(mm_config.rho1, s_config.mscale.rho0);
  FitResult initial = fit_s(problem, s_config);
  if (initial.exact_fit || !(initial.scale > 0.0)) return initial;
  FitResult out = fit_mm_given_scale(problem, mm_config, initial.beta, initial.scale);
  return out;
}

}  // namespace robreg
