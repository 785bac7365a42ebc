#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robreg/inference.hpp"
#include "robreg/mm_estimator.hpp"
#include "robreg/problem.hpp"
#include "robreg/s_estimator.hpp"

namespace robreg {

struct DimRule {
  enum class Kind { Fixed, Power, Log };
  Kind kind = Kind::Fixed;
  /// p for Fixed, gamma for Power (p = round(n^gamma)), kappa for Log
  /// (p = round(kappa n / log n)).
  double value = 5.0;

  int p_for(int n) const;
};

struct DesignLaw {
  enum class Kind { GaussianIdentity, GaussianToeplitz, ScaleMixture };
  Kind kind = Kind::GaussianIdentity;
  /// Lag-one correlation for GaussianToeplitz: Cov(x_j, x_k) = r^|j-k|.
  double toeplitz_r = 0.5;
};

enum class Beta0Rule { Zero, UnitNormSpread };

struct Contamination {
  enum class Scheme { Vertical, BadLeverage };
  Scheme scheme = Scheme::Vertical;
  double fraction = 0.0;
  /// Vertical: y_i = k_y.  BadLeverage: x_i = k_x e_1, y_i = k_y.
  double k_x = 10.0;
  double k_y = 1e6;
};

enum class EstimatorKind { S, MM, LeastSquares };
enum class ExperimentKind { Rate, Normality, ScaleConsistency, Breakdown, UniformConvergence };
enum class ContrastRule { FirstCoordinate, RandomUnit };

struct ScenarioConfig {
  ExperimentKind experiment = ExperimentKind::Rate;
  std::vector<int> n_grid{200};
  DimRule dim_rule;
  DesignLaw design_law;
  ErrorLaw error_law = ErrorLaw::gaussian(1.0);
  Beta0Rule beta0_rule = Beta0Rule::UnitNormSpread;
  std::optional<Contamination> contamination;
  int replications = 100;
  std::uint64_t seed = 1;
  EstimatorKind estimator = EstimatorKind::MM;
  MScaleSpec mscale;
  RhoKernel rho1 = RhoKernel::bisquare(4.685);
  int n_subsamples = 500;
  int n_keep = 5;
  int n_concentration = 20;
  ContrastRule a_rule = ContrastRule::FirstCoordinate;
  double level = 0.95;
  /// Probes per grid point for the uniform convergence check.
  int probes = 10000;
  int threads = 1;
  /// Wall-clock per replication in the `ms` column; 0 when false so that
  /// reports are byte-for-byte reproducible.
  bool record_timing = false;

  /// Throws ConfigError on invalid settings, including p >= [n (1 - b)].
  void validate() const;
  SFitConfig s_config(std::uint64_t fit_seed) const;
  MMFitConfig mm_config() const;
};

struct Scenario {
  RegressionProblem problem;
  Vector beta0;
  Vector u;  ///< drawn errors, before contamination
};

/// Draws one data set; deterministic in (config.seed, n, rep).
Scenario generate_scenario(const ScenarioConfig& config, int n, int rep);

struct ReplicationRow {
  int n = 0;
  int p = 0;
  int rep = 0;
  double err = 0.0;        ///< |beta_hat - beta0|
  double rate_stat = 0.0;  ///< sqrt(n / p) |beta_hat - beta0|
  double scale = 0.0;
  double z = 0.0;          ///< NaN unless a normality run
  int covered = -1;        ///< -1 when not applicable
  double ms = 0.0;
  double baseline_err = 0.0;  ///< least squares error (breakdown runs), else NaN
  bool failed = false;
  bool audited = false;
  bool audit_ok = true;
  std::string error;
};

struct GridAggregate {
  int n = 0;
  int p = 0;
  int count = 0;
  int failures = 0;
  double median_err = 0.0;
  double median_rate_stat = 0.0;
  double median_scale = 0.0;
  double median_scale_error = 0.0;  ///< median |scale - scale_ref|
  double coverage = 0.0;
  double z_mean = 0.0;
  double z_var = 0.0;
  double qq_corr = 0.0;
  double median_baseline_err = 0.0;
  double median_error_ratio = 0.0;  ///< median baseline_err / err
  double sup_discrepancy = 0.0;     ///< uniform convergence runs
  int audits = 0;
  int audit_failures = 0;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::Rate;
  std::vector<ReplicationRow> per_replication;
  std::vector<GridAggregate> aggregates;
  /// s(F0) for the configured rho0, b and error law.
  double scale_ref = 0.0;
  /// Limiting variance s0^2 a / b^2 (normality runs).
  double asymptotic_variance = 0.0;
};

ExperimentReport run_rate_experiment(const ScenarioConfig& config);
ExperimentReport run_normality_experiment(const ScenarioConfig& config,
                                          ContrastRule a_rule);
ExperimentReport run_scale_consistency_experiment(const ScenarioConfig& config);
ExperimentReport run_breakdown_experiment(const ScenarioConfig& config);
/// Dispatches on config.experiment.
ExperimentReport run_experiment(const ScenarioConfig& config);

struct UniformCheck {
  double sup_discrepancy = 0.0;
  double s0 = 0.0;
  int probes = 0;
};

/// Draws X (Gaussian identity) and u from `law`, then over random (b, s)
/// probes computes |(1/n) sum rho((u_i - x_i^T b) / s) - (1/n) sum R(x_i^T b, s)|
/// with R(v, s) = E rho((u - v) / s) from quadrature. s ranges over a log
/// grid in [0.1 s0, 2 s0], s0 = population_scale(mscale, law).
UniformCheck run_uniform_convergence_check(int n, int p, const RhoKernel& rho,
                                           const ErrorLaw& law, int n_probes,
                                           std::uint64_t seed,
                                           const MScaleSpec& mscale = {});

/// Order statistics used by the aggregates.
double median(std::vector<double> v);
/// Correlation between sorted values and normal scores (Blom positions).
double normal_qq_correlation(std::vector<double> v);

/// Fixed header: n,p,rep,err,rate_stat,scale,z,covered,ms
void write_csv(const ExperimentReport& report, std::ostream& os);
nlohmann::json to_json(const ExperimentReport& report);

std::string_view experiment_name(ExperimentKind kind);

}  // namespace robreg
