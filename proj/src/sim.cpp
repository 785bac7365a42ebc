#include "robreg/sim.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "robreg/errors.hpp"
#include "robreg/quadrature.hpp"
#include "robreg/rng.hpp"

namespace robreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename F>
void parallel_for(int count, int threads, F&& body) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  }
}

Vector random_unit(Rng& rng, Eigen::Index p) {
  std::normal_distribution<double> z;
  Vector v(p);
  do {
    for (Eigen::Index j = 0; j < p; ++j) v(j) = z(rng);
  } while (!(v.norm() > 0.0));
  return v.normalized();
}

Vector contrast_vector(const ScenarioConfig& c, ContrastRule rule, int n, int p) {
  if (rule == ContrastRule::FirstCoordinate) return Vector::Unit(p, 0);
  Rng rng(c.seed, {static_cast<std::uint64_t>(n), 0xC0417A57ULL});
  return random_unit(rng, p);
}

FitResult fit_with(const ScenarioConfig& c, const RegressionProblem& problem,
                   std::uint64_t fit_seed) {
  switch (c.estimator) {
    case EstimatorKind::S:
      return fit_s(problem, c.s_config(fit_seed));
    case EstimatorKind::MM:
      return fit_mm(problem, c.s_config(fit_seed), c.mm_config());
    case EstimatorKind::LeastSquares: {
      FitResult out;
      out.beta = least_squares(problem.X(), problem.y());
      out.scale = residual_scale(problem, c.mscale, out.beta);
      out.objective = problem.residuals(out.beta).squaredNorm();
      out.converged = true;
      return out;
    }
  }
  throw ConfigError("unknown estimator");
}

// Spot audit of the module contracts on a fitted row.
bool audit_fit(const ScenarioConfig& c, const RegressionProblem& problem,
               const FitResult& fit) {
  if (fit.exact_fit) return true;
  for (std::size_t i = 1; i < fit.trace.size(); ++i) {
    if (fit.trace[i].second > fit.trace[i - 1].second) return false;
  }
  const double n = static_cast<double>(problem.n());
  const double p = static_cast<double>(problem.p());
  switch (c.estimator) {
    case EstimatorKind::S: {
      const Vector r = problem.residuals(fit.beta);
      const double g = scale_equation(c.mscale, {r.data(), static_cast<std::size_t>(r.size())}, fit.scale);
      return std::abs(g) <= 1e-10;
    }
    case EstimatorKind::MM: {
      if (!fit.converged) return true;
      const Vector g = score_vector(problem, c.rho1, fit.beta, fit.scale);
      return g.norm() / (std::sqrt(n) * p) <= 1e-6;
    }
    case EstimatorKind::LeastSquares:
      return true;
  }
  return true;
}

struct RowContext {
  const ScenarioConfig& config;
  int n;
  int p;
  int rep;
  Scenario& scenario;
  ReplicationRow& row;
};

template <typename F>
ExperimentReport run_replications(const ScenarioConfig& c, ExperimentKind kind,
                                  F&& per_row) {
  c.validate();
  ExperimentReport report;
  report.kind = kind;
  const int grid = static_cast<int>(c.n_grid.size());
  const int total = grid * c.replications;
  report.per_replication.resize(static_cast<std::size_t>(total));
  parallel_for(total, c.threads, [&](int task) {
    const int gi = task / c.replications;
    const int rep = task % c.replications;
    const int n = c.n_grid[static_cast<std::size_t>(gi)];
    const int p = c.dim_rule.p_for(n);
    ReplicationRow& row = report.per_replication[static_cast<std::size_t>(task)];
    row.n = n;
    row.p = p;
    row.rep = rep;
    row.z = kNaN;
    row.baseline_err = kNaN;
    const auto start = std::chrono::steady_clock::now();
    try {
      Scenario sc = generate_scenario(c, n, rep);
      per_row(RowContext{c, n, p, rep, sc, row});
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      row.err = row.rate_stat = row.scale = row.z = kNaN;
      row.covered = -1;
    }
    if (c.record_timing) {
      row.ms = std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start)
                   .count();
    }
  });
  return report;
}

void fill_fit_fields(const RowContext& ctx, const FitResult& fit) {
  const Vector diff = fit.beta - ctx.scenario.beta0;
  ctx.row.err = diff.norm();
  ctx.row.rate_stat = std::sqrt(static_cast<double>(ctx.n) / ctx.p) * ctx.row.err;
  ctx.row.scale = fit.scale;
  if (ctx.rep % 100 == 0) {
    ctx.row.audited = true;
    ctx.row.audit_ok = audit_fit(ctx.config, ctx.scenario.problem, fit);
  }
}

std::uint64_t fit_seed(const ScenarioConfig& c, int n, int rep) {
  return derive_seed(c.seed, {static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(rep), 0xF17ULL});
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size() - 1);
}

void aggregate(const ScenarioConfig& c, ExperimentReport& report) {
  report.aggregates.clear();
  for (int n : c.n_grid) {
    GridAggregate g;
    g.n = n;
    g.p = c.dim_rule.p_for(n);
    std::vector<double> err, rate, scale, scale_err, z, base, ratio;
    int covered = 0, covered_count = 0;
    for (const ReplicationRow& row : report.per_replication) {
      if (row.n != n) continue;
      ++g.count;
      if (row.audited) {
        ++g.audits;
        if (!row.audit_ok) ++g.audit_failures;
      }
      if (row.failed) {
        ++g.failures;
        continue;
      }
      err.push_back(row.err);
      rate.push_back(row.rate_stat);
      scale.push_back(row.scale);
      scale_err.push_back(std::abs(row.scale - report.scale_ref));
      if (std::isfinite(row.z)) z.push_back(row.z);
      if (row.covered >= 0) {
        ++covered_count;
        covered += row.covered;
      }
      if (std::isfinite(row.baseline_err)) {
        base.push_back(row.baseline_err);
        ratio.push_back(row.baseline_err / row.err);
      }
    }
    g.median_err = median(err);
    g.median_rate_stat = median(rate);
    g.median_scale = median(scale);
    g.median_scale_error = median(scale_err);
    g.coverage = covered_count > 0 ? static_cast<double>(covered) / covered_count : kNaN;
    // Sorting first makes the reductions independent of completion order.
    std::sort(z.begin(), z.end());
    g.z_mean = z.empty() ? kNaN : std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
    g.z_var = sample_variance(z);
    g.qq_corr = z.size() >= 3 ? normal_qq_correlation(z) : kNaN;
    g.median_baseline_err = median(base);
    g.median_error_ratio = median(ratio);
    g.sup_discrepancy = kNaN;
    report.aggregates.push_back(g);
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

// Cubic Hermite table of R(v, s) over v >= 0 for one s.
class ShiftedLossTable {
 public:
  ShiftedLossTable(const RhoKernel& k, const ErrorLaw& law, double s, double v_max,
                   double h)
      : k_(k), law_(law), s_(s), h_(h) {
    const auto nodes = static_cast<std::size_t>(std::ceil(v_max / h)) + 2;
    value_.resize(nodes);
    slope_.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
      const double v = h * static_cast<double>(j);
      value_[j] = expected_shifted_loss(k, law, v, s);
      slope_[j] = expected_shifted_loss_dv(k, law, v, s);
    }
  }

  double operator()(double v) const {
    v = std::abs(v);  // R(-v, s) = R(v, s) for a symmetric law.
    const double pos = v / h_;
    const auto j = static_cast<std::size_t>(pos);
    if (j + 1 >= value_.size()) return expected_shifted_loss(k_, law_, v, s_);
    const double t = pos - static_cast<double>(j);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * value_[j] + h10 * h_ * slope_[j] + h01 * value_[j + 1] +
           h11 * h_ * slope_[j + 1];
  }

 private:
  RhoKernel k_;
  ErrorLaw law_;
  double s_;
  double h_;
  std::vector<double> value_;
  std::vector<double> slope_;
};

}  // namespace

int DimRule::p_for(int n) const {
  double p = value;
  switch (kind) {
    case Kind::Fixed:
      p = value;
      break;
    case Kind::Power:
      p = std::pow(static_cast<double>(n), value);
      break;
    case Kind::Log:
      p = value * n / std::log(static_cast<double>(n));
      break;
  }
  return std::max(1, static_cast<int>(std::lround(p)));
}

void ScenarioConfig::validate() const {
  mscale.validate();
  if (n_grid.empty()) throw ConfigError("scenario: n_grid is empty");
  if (replications < 1) throw ConfigError("scenario: replications must be >= 1");
  if (threads < 1) throw ConfigError("scenario: threads must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("scenario: level must lie in (0, 1)");
  if (probes < 1) throw ConfigError("scenario: probes must be >= 1");
  if (n_subsamples < 1 || n_keep < 1 || n_keep > n_subsamples || n_concentration < 1) {
    throw ConfigError("scenario: invalid subsampling settings");
  }
  if (design_law.kind == DesignLaw::Kind::GaussianToeplitz &&
      !(std::abs(design_law.toeplitz_r) < 1.0)) {
    throw ConfigError("scenario: toeplitz r must satisfy |r| < 1");
  }
  if (contamination) {
    if (!(contamination->fraction >= 0.0 && contamination->fraction < 0.5)) {
      throw ConfigError("scenario: contamination fraction must lie in [0, 0.5)");
    }
  }
  if (estimator == EstimatorKind::MM) require_dominated(rho1, mscale.rho0);
  for (int n : n_grid) {
    if (n < 2) throw ConfigError("scenario: grid sizes must be >= 2");
    const int p = dim_rule.p_for(n);
    if (!(static_cast<double>(p) < std::floor(n * (1.0 - mscale.b)))) {
      throw ConfigError("scenario: p = " + std::to_string(p) + " violates p < [n(1-b)] at n = " +
                        std::to_string(n));
    }
  }
}

SFitConfig ScenarioConfig::s_config(std::uint64_t fit_seed) const {
  SFitConfig s;
  s.mscale = mscale;
  s.n_subsamples = n_subsamples;
  s.n_keep = n_keep;
  s.n_concentration = n_concentration;
  s.seed = fit_seed;
  return s;
}

MMFitConfig ScenarioConfig::mm_config() const {
  MMFitConfig m;
  m.rho1 = rho1;
  return m;
}

Scenario generate_scenario(const ScenarioConfig& c, int n, int rep) {
  const int p = c.dim_rule.p_for(n);
  Rng rng(c.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep), 0xDA7AULL});
  std::normal_distribution<double> z;
  Matrix X(n, p);
  for (int i = 0; i < n; ++i) {
    switch (c.design_law.kind) {
      case DesignLaw::Kind::GaussianIdentity:
        for (int j = 0; j < p; ++j) X(i, j) = z(rng);
        break;
      case DesignLaw::Kind::GaussianToeplitz: {
        const double r = c.design_law.toeplitz_r;
        const double innov = std::sqrt(1.0 - r * r);
        X(i, 0) = z(rng);
        for (int j = 1; j < p; ++j) X(i, j) = r * X(i, j - 1) + innov * z(rng);
        break;
      }
      case DesignLaw::Kind::ScaleMixture: {
        // Two-point scale mixture of standard normals.
        const double w = rng.uniform() < 0.9 ? 1.0 : 3.0;
        for (int j = 0; j < p; ++j) X(i, j) = w * z(rng);
        break;
      }
    }
  }
  Vector u(n);
  for (int i = 0; i < n; ++i) u(i) = c.error_law.sample(rng);
  Vector beta0 = c.beta0_rule == Beta0Rule::Zero
                     ? Vector::Zero(p)
                     : Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
  Vector y = X * beta0 + u;
  if (c.contamination) {
    const int m = static_cast<int>(std::floor(c.contamination->fraction * n));
    for (int i = 0; i < m; ++i) {
      if (c.contamination->scheme == Contamination::Scheme::BadLeverage) {
        X.row(i).setZero();
        X(i, 0) = c.contamination->k_x;
      }
      y(i) = c.contamination->k_y;
    }
  }
  return Scenario{RegressionProblem(std::move(X), std::move(y)), std::move(beta0), std::move(u)};
}

ExperimentReport run_rate_experiment(const ScenarioConfig& config) {
  ExperimentReport report =
      run_replications(config, ExperimentKind::Rate, [](const RowContext& ctx) {
        const FitResult fit = fit_with(ctx.config, ctx.scenario.problem,
                                       fit_seed(ctx.config, ctx.n, ctx.rep));
        fill_fit_fields(ctx, fit);
      });
  report.scale_ref = population_scale(config.mscale, config.error_law);
  aggregate(config, report);
  return report;
}

ExperimentReport run_normality_experiment(const ScenarioConfig& config,
                                          ContrastRule a_rule) {
  if (config.estimator == EstimatorKind::LeastSquares) {
    throw ConfigError("normality experiment needs a robust estimator");
  }
  const double s0 = population_scale(config.mscale, config.error_law);
  const RhoKernel& kernel =
      config.estimator == EstimatorKind::MM ? config.rho1 : config.mscale.rho0;
  const AsymptoticMoments moments = asymptotic_moments(kernel, s0, config.error_law);
  const double sd = std::sqrt(moments.variance(s0));
  const QuadratureMoments source{config.error_law, s0};

  ExperimentReport report =
      run_replications(config, ExperimentKind::Normality, [&](const RowContext& ctx) {
        const FitResult fit = fit_with(ctx.config, ctx.scenario.problem,
                                       fit_seed(ctx.config, ctx.n, ctx.rep));
        fill_fit_fields(ctx, fit);
        const Vector a = contrast_vector(ctx.config, a_rule, ctx.n, ctx.p);
        const ContrastInference ci = contrast_inference(
            ctx.scenario.problem, fit, kernel, a, ctx.config.level, source);
        const double truth = ci.a_n.dot(ctx.scenario.beta0);
        ctx.row.z = std::sqrt(static_cast<double>(ctx.n)) / ci.r_n *
                    (ci.estimate - truth) / sd;
        ctx.row.covered = (ci.ci_low <= truth && truth <= ci.ci_high) ? 1 : 0;
      });
  report.scale_ref = s0;
  report.asymptotic_variance = moments.variance(s0);
  aggregate(config, report);
  return report;
}

ExperimentReport run_scale_consistency_experiment(const ScenarioConfig& config) {
  if (config.estimator != EstimatorKind::S) {
    throw ConfigError("scale consistency experiment requires estimator = s");
  }
  ExperimentReport report = run_rate_experiment(config);
  report.kind = ExperimentKind::ScaleConsistency;
  return report;
}

ExperimentReport run_breakdown_experiment(const ScenarioConfig& config) {
  ExperimentReport report =
      run_replications(config, ExperimentKind::Breakdown, [](const RowContext& ctx) {
        const FitResult fit = fit_with(ctx.config, ctx.scenario.problem,
                                       fit_seed(ctx.config, ctx.n, ctx.rep));
        fill_fit_fields(ctx, fit);
        const Vector ls = least_squares(ctx.scenario.problem.X(), ctx.scenario.problem.y());
        ctx.row.baseline_err = (ls - ctx.scenario.beta0).norm();
      });
  report.scale_ref = population_scale(config.mscale, config.error_law);
  aggregate(config, report);
  return report;
}

UniformCheck run_uniform_convergence_check(int n, int p, const RhoKernel& rho,
                                           const ErrorLaw& law, int n_probes,
                                           std::uint64_t seed,
                                           const MScaleSpec& mscale) {
  if (n_probes < 1) throw ConfigError("uniform check: n_probes must be >= 1");
  if (n < 1 || p < 1) throw ConfigError("uniform check: n and p must be positive");
  UniformCheck out;
  out.s0 = population_scale(mscale, law);
  out.probes = n_probes;

  Rng data_rng(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p), 0xD47AULL});
  std::normal_distribution<double> z;
  Matrix X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = z(data_rng);
  Vector u(n);
  for (int i = 0; i < n; ++i) u(i) = law.sample(data_rng);

  constexpr int kScales = 16;
  const double radii[] = {0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  constexpr int kRadii = sizeof(radii) / sizeof(radii[0]);
  std::vector<double> scales(kScales);
  for (int j = 0; j < kScales; ++j) {
    const double t = static_cast<double>(j) / (kScales - 1);
    scales[static_cast<std::size_t>(j)] = out.s0 * 0.1 * std::pow(20.0, t);
  }
  // |x_i^T b| <= max |x_i| * max radius.
  const double v_max = X.rowwise().norm().maxCoeff() * radii[kRadii - 1];
  const double h = 0.01 * law.scale();
  std::vector<ShiftedLossTable> tables;
  tables.reserve(kScales);
  for (double s : scales) tables.emplace_back(rho, law, s, v_max, h);

  Rng probe_rng(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p), 0x9808EULL});
  double sup = 0.0;
  Vector b(p);
  for (int probe = 0; probe < n_probes; ++probe) {
    double s;
    const ShiftedLossTable* table;
    if (probe == 0) {
      // b = 0, s = s0.
      b.setZero();
      s = out.s0;
      table = nullptr;
    } else {
      const auto si = static_cast<std::size_t>(probe_rng.below(kScales));
      s = scales[si];
      table = &tables[si];
      b = radii[probe_rng.below(kRadii)] * random_unit(probe_rng, p);
    }
    const Vector v = X * b;
    double emp = 0.0, pop = 0.0;
    const double r0 = table ? 0.0 : expected_shifted_loss(rho, law, 0.0, s);
    for (int i = 0; i < n; ++i) {
      emp += rho.rho_unchecked((u(i) - v(i)) / s);
      pop += table ? (*table)(v(i)) : r0;
    }
    sup = std::max(sup, std::abs(emp - pop) / n);
  }
  out.sup_discrepancy = sup;
  return out;
}

ExperimentReport run_experiment(const ScenarioConfig& config) {
  switch (config.experiment) {
    case ExperimentKind::Rate:
      return run_rate_experiment(config);
    case ExperimentKind::Normality:
      return run_normality_experiment(config, config.a_rule);
    case ExperimentKind::ScaleConsistency:
      return run_scale_consistency_experiment(config);
    case ExperimentKind::Breakdown:
      return run_breakdown_experiment(config);
    case ExperimentKind::UniformConvergence: {
      config.validate();
      ExperimentReport report;
      report.kind = ExperimentKind::UniformConvergence;
      report.scale_ref = population_scale(config.mscale, config.error_law);
      for (int n : config.n_grid) {
        const int p = config.dim_rule.p_for(n);
        const auto start = std::chrono::steady_clock::now();
        const UniformCheck chk = run_uniform_convergence_check(
            n, p, config.rho1, config.error_law, config.probes, config.seed, config.mscale);
        ReplicationRow row;
        row.n = n;
        row.p = p;
        row.err = chk.sup_discrepancy;
        row.rate_stat = kNaN;
        row.scale = chk.s0;
        row.z = kNaN;
        row.baseline_err = kNaN;
        if (config.record_timing) {
          row.ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
        }
        report.per_replication.push_back(row);
        GridAggregate g;
        g.n = n;
        g.p = p;
        g.count = 1;
        g.median_err = g.sup_discrepancy = chk.sup_discrepancy;
        g.median_rate_stat = g.median_scale_error = g.coverage = g.z_mean = g.z_var =
            g.qq_corr = g.median_baseline_err = g.median_error_ratio = kNaN;
        g.median_scale = chk.s0;
        report.aggregates.push_back(g);
      }
      return report;
    }
  }
  throw ConfigError("unknown experiment");
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double normal_qq_correlation(std::vector<double> v) {
  const std::size_t n = v.size();
  if (n < 3) return kNaN;
  std::sort(v.begin(), v.end());
  const boost::math::normal normal;
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = boost::math::quantile(
        normal, (static_cast<double>(i + 1) - 0.375) / (static_cast<double>(n) + 0.25));
  }
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  const double mq = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (v[i] - mv) * (q[i] - mq);
    sxx += (v[i] - mv) * (v[i] - mv);
    syy += (q[i] - mq) * (q[i] - mq);
  }
  return sxy / std::sqrt(sxx * syy);
}

void write_csv(const ExperimentReport& report, std::ostream& os) {
  os << "n,p,rep,err,rate_stat,scale,z,covered,ms\n";
  for (const ReplicationRow& r : report.per_replication) {
    os << r.n << ',' << r.p << ',' << r.rep << ',' << format_double(r.err) << ','
       << format_double(r.rate_stat) << ',' << format_double(r.scale) << ','
       << format_double(r.z) << ',' << (r.covered < 0 ? std::string("nan") : std::to_string(r.covered))
       << ',' << format_double(r.ms) << '\n';
  }
}

std::string_view experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Rate:
      return "rate";
    case ExperimentKind::Normality:
      return "normality";
    case ExperimentKind::ScaleConsistency:
      return "scale";
    case ExperimentKind::Breakdown:
      return "breakdown";
    case ExperimentKind::UniformConvergence:
      return "uniform";
  }
  return "unknown";
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["experiment"] = experiment_name(report.kind);
  j["scale_ref"] = number_or_null(report.scale_ref);
  j["asymptotic_variance"] = number_or_null(report.asymptotic_variance);
  int failed = 0;
  nlohmann::json errors = nlohmann::json::array();
  for (const ReplicationRow& r : report.per_replication) {
    if (!r.failed) continue;
    ++failed;
    if (errors.size() < 20) errors.push_back({{"n", r.n}, {"rep", r.rep}, {"error", r.error}});
  }
  j["failed_rows"] = failed;
  j["errors"] = errors;
  nlohmann::json aggs = nlohmann::json::array();
  for (const GridAggregate& g : report.aggregates) {
    aggs.push_back({{"n", g.n},
                    {"p", g.p},
                    {"count", g.count},
                    {"failures", g.failures},
                    {"median_err", number_or_null(g.median_err)},
                    {"median_rate_stat", number_or_null(g.median_rate_stat)},
                    {"median_scale", number_or_null(g.median_scale)},
                    {"median_scale_error", number_or_null(g.median_scale_error)},
                    {"coverage", number_or_null(g.coverage)},
                    {"z_mean", number_or_null(g.z_mean)},
                    {"z_var", number_or_null(g.z_var)},
                    {"qq_corr", number_or_null(g.qq_corr)},
                    {"median_baseline_err", number_or_null(g.median_baseline_err)},
                    {"median_error_ratio", number_or_null(g.median_error_ratio)},
                    {"sup_discrepancy", number_or_null(g.sup_discrepancy)},
                    {"audits", g.audits},
                    {"audit_failures", g.audit_failures}});
  }
  j["aggregates"] = aggs;
  return j;
}

}  // namespace robreg
