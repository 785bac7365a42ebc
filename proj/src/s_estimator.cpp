#include "robreg/s_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "robreg/errors.hpp"
#include "robreg/rng.hpp"

namespace robreg {

namespace {

constexpr int kMaxResample = 100;
constexpr int kPolishSteps = 1000;
constexpr double kPolishTol = 1e-12;
// Rounding slack for the scale comparison in a concentration step.
constexpr double kStepSlack = 1e-14;

struct Candidate {
  Vector beta;
  double scale;
};

double median_abs(const Vector& v) {
  std::vector<double> a(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(v(i));
  auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
  std::nth_element(a.begin(), mid, a.end());
  return *mid;
}

double scale_of(const MScaleSpec& spec, const Vector& r, double hint) {
  const std::span<const double> view(r.data(), static_cast<std::size_t>(r.size()));
  return hint > 0.0 ? m_scale(spec, view, hint) : m_scale(spec, view);
}

// Draws p distinct row indices and solves the elemental system exactly.
std::optional<Vector> elemental_fit(const RegressionProblem& problem, Rng& rng,
                                    std::vector<Eigen::Index>& idx) {
  const auto n = static_cast<std::uint64_t>(problem.n());
  const Eigen::Index p = problem.p();
  Matrix Xs(p, p);
  Vector ys(p);
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    idx.clear();
    while (static_cast<Eigen::Index>(idx.size()) < p) {
      const auto i = static_cast<Eigen::Index>(rng.below(n));
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      Xs.row(j) = problem.X().row(idx[static_cast<std::size_t>(j)]);
      ys(j) = problem.y()(idx[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Matrix> lu(Xs);
    if (lu.rank() < p) continue;
    Vector beta = lu.solve(ys);
    if (beta.allFinite()) return beta;
  }
  return std::nullopt;
}

FitResult exact_fit_result(Vector beta, double scale) {
  FitResult out;
  out.beta = std::move(beta);
  out.scale = scale;
  out.objective = scale;
  out.converged = true;
  out.exact_fit = true;
  out.trace.emplace_back(0, scale);
  return out;
}

}  // namespace

void SFitConfig::validate() const {
  mscale.validate();
  if (n_subsamples <= 0) throw ConfigError("SFitConfig: n_subsamples must be positive");
  if (n_keep <= 0 || n_keep > n_subsamples) {
    throw ConfigError("SFitConfig: need 0 < n_keep <= n_subsamples");
  }
  if (n_concentration <= 0) throw ConfigError("SFitConfig: n_concentration must be positive");
  if (initial_steps < 0) throw ConfigError("SFitConfig: initial_steps must be >= 0");
  if (!(i_step_tol > 0.0)) throw ConfigError("SFitConfig: i_step_tol must be positive");
}

void require_scale_feasible(const RegressionProblem& problem, double b) {
  const double limit = std::floor(static_cast<double>(problem.n()) * (1.0 - b));
  if (!(static_cast<double>(problem.p()) < limit)) {
    throw ConfigError("p = " + std::to_string(problem.p()) +
                      " violates p < [n(1-b)] = " + std::to_string(static_cast<long>(limit)));
  }
}

double residual_scale(const RegressionProblem& problem, const MScaleSpec& mscale,
                      const Vector& beta) {
  const Vector r = problem.residuals(beta);
  return scale_of(mscale, r, 0.0);
}

ConcentrationStep concentration_step(const RegressionProblem& problem,
                                     const MScaleSpec& mscale,
                                     const Vector& beta_in) {
  return concentration_step(problem, mscale, beta_in,
                            residual_scale(problem, mscale, beta_in));
}

ConcentrationStep concentration_step(const RegressionProblem& problem,
                                     const MScaleSpec& mscale,
                                     const Vector& beta_in, double scale_in) {
  ConcentrationStep out{beta_in, scale_in, false};
  if (!(scale_in > 0.0)) return out;
  const Vector r = problem.residuals(beta_in);
  Vector w(r.size());
  const double inv = 1.0 / scale_in;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    w(i) = mscale.rho0.weight_unchecked(r(i) * inv);
  }
  Vector beta;
  if (!weighted_least_squares(problem.X(), problem.y(), w, beta)) return out;
  const Vector r_new = problem.y() - problem.X() * beta;
  const double s_new = scale_of(mscale, r_new, scale_in);
  if (!(s_new <= scale_in * (1.0 + kStepSlack))) return out;
  out.beta = std::move(beta);
  out.scale = s_new;
  out.accepted = true;
  return out;
}

FitResult fit_s(const RegressionProblem& problem, const SFitConfig& config) {
  config.validate();
  problem.require_nonsingular();
  require_scale_feasible(problem, config.mscale.b);

  const MScaleSpec& spec = config.mscale;
  const double exact_threshold = 1e-12 * (1.0 + median_abs(problem.y()));
  const auto keep = static_cast<std::size_t>(config.n_keep);
  std::vector<Candidate> best;
  best.reserve(keep + 1);
  std::optional<FitResult> exact;

  auto consider = [&](Vector beta) {
    double s = scale_of(spec, problem.residuals(beta), 0.0);
    for (int k = 0; k < config.initial_steps && s >= exact_threshold; ++k) {
      ConcentrationStep step = concentration_step(problem, spec, beta, s);
      if (!step.accepted) break;
      beta = std::move(step.beta);
      s = step.scale;
    }
    if (s < exact_threshold) {
      exact = exact_fit_result(std::move(beta), s);
      return;
    }
    if (best.size() < keep || s < best.back().scale) {
      auto pos = std::upper_bound(best.begin(), best.end(), s,
                                  [](double v, const Candidate& c) { return v < c.scale; });
      best.insert(pos, Candidate{std::move(beta), s});
      if (best.size() > keep) best.pop_back();
    }
  };

  consider(least_squares(problem.X(), problem.y()));
  if (exact) return *exact;

  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(problem.p()));
  int usable = 0;
  for (int slot = 0; slot < config.n_subsamples; ++slot) {
    Rng rng(config.seed, {static_cast<std::uint64_t>(slot)});
    std::optional<Vector> beta = elemental_fit(problem, rng, idx);
    if (!beta) continue;
    ++usable;
    consider(std::move(*beta));
    if (exact) return *exact;
  }
  if (usable == 0) {
    throw DegenerateDesignError("fit_s: every elemental subsample was singular");
  }

  const double sqrt_n = std::sqrt(static_cast<double>(problem.n()));
  auto concentrate = [&](FitResult& fr, int max_steps, double tol) {
    while (fr.iterations < max_steps) {
      ConcentrationStep step = concentration_step(problem, spec, fr.beta, fr.scale);
      if (!step.accepted) {
        fr.converged = true;
        return;
      }
      const double move = (problem.X() * (step.beta - fr.beta)).norm() / (sqrt_n * step.scale);
      ++fr.iterations;
      fr.beta = std::move(step.beta);
      fr.scale = fr.objective = step.scale;
      // Steps inside the rounding slack are taken but not traced.
      if (fr.scale <= fr.trace.back().second) fr.trace.emplace_back(fr.iterations, fr.scale);
      if (fr.scale < exact_threshold) {
        fr.exact_fit = true;
        return;
      }
      if (move <= tol) {
        fr.converged = true;
        return;
      }
    }
  };

  FitResult result;
  bool have = false;
  for (Candidate& cand : best) {
    FitResult fr;
    fr.beta = std::move(cand.beta);
    fr.scale = fr.objective = cand.scale;
    fr.trace.emplace_back(0, cand.scale);
    concentrate(fr, config.n_concentration, config.i_step_tol);
    if (fr.exact_fit) return exact_fit_result(std::move(fr.beta), fr.scale);
    if (!have || fr.scale < result.scale) {
      result = std::move(fr);
      have = true;
    }
  }
  // The winner is concentrated until it stops moving.
  result.converged = false;
  concentrate(result, result.iterations + kPolishSteps, std::min(config.i_step_tol, kPolishTol));
  if (result.exact_fit) return exact_fit_result(std::move(result.beta), result.scale);
  return result;
}

}  // namespace robreg
