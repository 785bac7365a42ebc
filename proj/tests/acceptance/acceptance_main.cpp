// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "robreg/design.hpp"
#include "robreg/errors.hpp"
#include "robreg/mm_estimator.hpp"
#include "robreg/rho.hpp"
#include "robreg/scenario_io.hpp"
#include "robreg/sim.hpp"

using namespace robreg;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

ScenarioConfig bundled(const std::string& name) {
  return load_scenario(std::string(ROBREG_SCENARIO_DIR) + "/" + name + ".scenario");
}

Matrix gaussian_matrix(std::mt19937_64& gen, int n, int p) {
  std::normal_distribution<double> z;
  Matrix X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = z(gen);
  return X;
}

std::span<const double> view(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// 1. M-scale contract.
Outcome mscale_contract() {
  Outcome out;
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> ndist(5, 500);
  std::normal_distribution<double> z;
  std::cauchy_distribution<double> cd;
  const MScaleSpec spec;
  double worst_root = 0, worst_equi = 0;
  for (int t = 0; t < 1000; ++t) {
    Vector u(ndist(gen));
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = t % 2 ? cd(gen) : z(gen);
    const double s = m_scale(spec, view(u));
    if (!(s > 0)) {
      out.require(false, "nonpositive scale on a generic sample");
      continue;
    }
    worst_root = std::max(worst_root, std::abs(scale_equation(spec, view(u), s)));
    for (double lambda : {1e-6, 1.0, 1e6}) {
      const Vector v = lambda * u;
      worst_equi = std::max(worst_equi, std::abs(m_scale(spec, view(v)) - lambda * s) / (lambda * s));
    }
    const Vector neg = -u;
    out.require(m_scale(spec, view(neg)) == s, "sign invariance not exact");
    // Zero-mass threshold: pad with zeros up to and past (1 - b) n.
    if (t % 20 == 0) {
      std::vector<double> w(u.data(), u.data() + u.size());
      while (true) {
        std::size_t zeros = static_cast<std::size_t>(std::count(w.begin(), w.end(), 0.0));
        const bool degenerate = static_cast<double>(zeros) >= (1.0 - spec.b) * static_cast<double>(w.size());
        const double sw = m_scale(spec, w);
        if (degenerate) {
          out.require(sw == 0.0, "zero threshold: expected exactly 0");
          break;
        }
        out.require(sw > 0.0, "zero threshold: expected positive scale below threshold");
        w.push_back(0.0);
      }
    }
  }
  out.require(worst_root <= 1e-10, "root residual " + fmt(worst_root));
  out.require(worst_equi <= 1e-10, "equivariance error " + fmt(worst_equi));
  if (out.pass) out.detail = "max root residual " + fmt(worst_root) + ", max equivariance error " + fmt(worst_equi);
  return out;
}

// 2. Derivatives against central differences.
Outcome derivative_agreement() {
  Outcome out;
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> cdist(0.5, 5.0);
  const double h = 1e-5;
  double worst = 0;
  for (RhoFamily f : {RhoFamily::Bisquare, RhoFamily::Quartic, RhoFamily::ExpSquared}) {
    for (int trial = 0; trial < 20; ++trial) {
      const RhoKernel k(f, cdist(gen));
      const double c = k.c();
      for (int i = 0; i < 10000; ++i) {
        const double x = -2.0 * c + 4.0 * c * i / 9999.0;
        if (std::abs(std::abs(x) - c) < 1e-3) continue;
        auto rel = [](double a, double b) { return std::abs(a - b) / (1.0 + std::abs(a)); };
        worst = std::max(worst, rel(k.psi(x), (k.rho(x + h) - k.rho(x - h)) / (2 * h)));
        worst = std::max(worst, rel(k.psi_prime(x), (k.psi(x + h) - k.psi(x - h)) / (2 * h)));
        if (k.is_c3()) {
          worst = std::max(worst, rel(k.psi_double_prime(x),
                                      (k.psi_prime(x + h) - k.psi_prime(x - h)) / (2 * h)));
        }
      }
    }
  }
  out.require(worst <= 1e-6, "max relative error " + fmt(worst));
  if (out.pass) out.detail = "max relative error " + fmt(worst);
  return out;
}

// Multi-resolution grid minimum of f over a box of half-width R around 0.
double grid_minimum(const std::function<double(const Vector&)>& f, int p, double R) {
  struct Cell {
    double value;
    Vector at;
  };
  const int coarse = p == 1 ? 20001 : 241;
  std::vector<Cell> cells;
  const double step = 2 * R / (coarse - 1);
  if (p == 1) {
    for (int i = 0; i < coarse; ++i) {
      Vector b = Vector::Constant(1, -R + i * step);
      cells.push_back({f(b), b});
    }
  } else {
    for (int i = 0; i < coarse; ++i)
      for (int j = 0; j < coarse; ++j) {
        Vector b(2);
        b << -R + i * step, -R + j * step;
        cells.push_back({f(b), b});
      }
  }
  std::partial_sort(cells.begin(), cells.begin() + 8, cells.end(),
                    [](const Cell& a, const Cell& b) { return a.value < b.value; });
  double best = cells.front().value;
  for (int start = 0; start < 8; ++start) {
    Vector center = cells[static_cast<std::size_t>(start)].at;
    double half = 2 * step;
    double local = cells[static_cast<std::size_t>(start)].value;
    const int m = p == 1 ? 201 : 41;
    for (int level = 0; level < 10; ++level) {
      Vector arg = center;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < (p == 1 ? 1 : m); ++j) {
          Vector b = center;
          b(0) += -half + 2 * half * i / (m - 1);
          if (p == 2) b(1) += -half + 2 * half * j / (m - 1);
          const double v = f(b);
          if (v < local) {
            local = v;
            arg = b;
          }
        }
      }
      center = arg;
      half *= 0.2;
    }
    best = std::min(best, local);
  }
  return best;
}

// 3. Optimizer contracts.
Outcome optimizer_contracts() {
  Outcome out;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  int traces = 0, stationary = 0;
  double worst_gap = 0, worst_grad = 0;
  auto check_fit = [&](const RegressionProblem& prob, const FitResult& fit, const RhoKernel* rho1) {
    for (std::size_t i = 1; i < fit.trace.size(); ++i) {
      out.require(fit.trace[i].second <= fit.trace[i - 1].second, "trace increased");
    }
    ++traces;
    if (rho1 && fit.converged && !fit.exact_fit) {
      const double g = score_vector(prob, *rho1, fit.beta, fit.scale).norm() /
                       (std::sqrt(static_cast<double>(prob.n())) * static_cast<double>(prob.p()));
      worst_grad = std::max(worst_grad, g);
      ++stationary;
    }
  };
  // Grid-oracle instances.
  for (int inst = 0; inst < 50; ++inst) {
    const int p = 1 + inst % 2;
    const int n = 20 + 2 * (inst % 11);
    Matrix X = gaussian_matrix(gen, n, p);
    Vector beta0(p);
    for (int j = 0; j < p; ++j) beta0(j) = std::uniform_real_distribution<double>(-2, 2)(gen);
    Vector y = X * beta0;
    for (int i = 0; i < n; ++i) y(i) += z(gen);
    const int outliers = static_cast<int>(0.15 * n);
    for (int i = 0; i < outliers; ++i) y(i) = 8.0 + z(gen);
    const RegressionProblem prob(X, y);
    SFitConfig sc;
    sc.seed = static_cast<std::uint64_t>(inst);
    const MMFitConfig mc;
    const FitResult s = fit_s(prob, sc);
    const FitResult mm = fit_mm(prob, sc, mc);
    check_fit(prob, s, nullptr);
    check_fit(prob, mm, &mc.rho1);
    const double R = 6.0;
    const double s_grid = grid_minimum(
        [&](const Vector& b) {
          const Vector r = y - X * b;
          return m_scale(sc.mscale, view(r));
        },
        p, R);
    const double mm_grid = grid_minimum(
        [&](const Vector& b) { return objective_ln(prob, mc.rho1, b, mm.scale); }, p, R);
    worst_gap = std::max({worst_gap, std::abs(s.objective - s_grid), std::abs(mm.objective - mm_grid)});
  }
  // Larger instances: traces and stationarity only.
  for (int inst = 0; inst < 50; ++inst) {
    const int p = 3 + inst % 8;
    const int n = 50 * p;
    const Matrix X = gaussian_matrix(gen, n, p);
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = X.row(i).sum() + (i < n / 10 ? 50.0 : z(gen));
    const RegressionProblem prob(X, y);
    SFitConfig sc;
    sc.seed = static_cast<std::uint64_t>(100 + inst);
    const MMFitConfig mc;
    check_fit(prob, fit_s(prob, sc), nullptr);
    const FitResult mm = fit_mm(prob, sc, mc);
    out.require(mm.converged, "MM fit did not converge");
    check_fit(prob, mm, &mc.rho1);
  }
  out.require(worst_gap <= 1e-4, "grid oracle gap " + fmt(worst_gap));
  out.require(worst_grad <= 1e-6, "gradient " + fmt(worst_grad));
  if (out.pass) {
    out.detail = std::to_string(traces) + " traces monotone, max stationarity " + fmt(worst_grad) +
                 " over " + std::to_string(stationary) + " fits, max grid gap " + fmt(worst_gap);
  }
  return out;
}

void require_grid(Outcome& out, const ScenarioConfig& c, const std::vector<int>& grid, int reps) {
  out.require(c.n_grid == grid, "scenario n_grid differs from the criterion");
  out.require(c.replications == reps, "scenario replications differ from the criterion");
}

void require_clean_rows(Outcome& out, const ExperimentReport& r) {
  for (const GridAggregate& g : r.aggregates) {
    out.require(g.failures == 0, "failed replications at n = " + std::to_string(g.n));
    out.require(g.audit_failures == 0, "audit failures at n = " + std::to_string(g.n));
  }
}

// 4. Scale consistency.
Outcome scale_consistency() {
  Outcome out;
  const ScenarioConfig c = bundled("scale");
  require_grid(out, c, {200, 800, 3200}, 200);
  out.require(c.estimator == EstimatorKind::S && c.dim_rule.p_for(200) == 5 &&
                  c.mscale.rho0 == RhoKernel::bisquare(1.547) && c.mscale.b == 0.5 &&
                  c.error_law.kind() == ErrorLaw::Kind::Gaussian && c.error_law.scale() == 1.0,
              "scenario settings differ from the criterion");
  const ExperimentReport r = run_scale_consistency_experiment(c);
  require_clean_rows(out, r);
  std::string med;
  for (std::size_t i = 0; i < r.aggregates.size(); ++i) {
    med += (i ? ", " : "") + fmt(r.aggregates[i].median_scale_error);
    if (i > 0) {
      out.require(r.aggregates[i].median_scale_error < r.aggregates[i - 1].median_scale_error,
                  "median |s - s(F0)| not strictly decreasing: " + med);
    }
  }
  out.require(r.aggregates.back().median_scale_error <= 0.05, "median error at n = 3200 is " + med);
  if (out.pass) out.detail = "s(F0) = " + fmt(r.scale_ref) + ", median |s - s(F0)| = " + med;
  return out;
}

// 5. Rate.
Outcome rate() {
  Outcome out;
  const ScenarioConfig c = bundled("rate");
  require_grid(out, c, {250, 1000, 4000}, 200);
  out.require(c.estimator == EstimatorKind::MM && c.dim_rule.kind == DimRule::Kind::Power &&
                  c.dim_rule.value == 0.4,
              "scenario settings differ from the criterion");
  const ExperimentReport r = run_rate_experiment(c);
  require_clean_rows(out, r);
  double lo = INFINITY, hi = 0;
  std::string med;
  for (const GridAggregate& g : r.aggregates) {
    lo = std::min(lo, g.median_rate_stat);
    hi = std::max(hi, g.median_rate_stat);
    med += (med.empty() ? "" : ", ") + std::string("p=") + std::to_string(g.p) + ": " + fmt(g.median_rate_stat);
  }
  out.require(hi / lo < 2.0, "median rate statistic ratio " + fmt(hi / lo) + " (" + med + ")");
  if (out.pass) out.detail = "median sqrt(n/p)|b - b0|: " + med + ", max/min " + fmt(hi / lo);
  return out;
}

// 6. Normality of a contrast.
Outcome normality() {
  Outcome out;
  const ScenarioConfig c = bundled("normality");
  require_grid(out, c, {500}, 1000);
  out.require(c.dim_rule.p_for(500) == 5 && c.error_law.kind() == ErrorLaw::Kind::Gaussian &&
                  c.a_rule == ContrastRule::FirstCoordinate && c.level == 0.95,
              "scenario settings differ from the criterion");
  const ExperimentReport r = run_normality_experiment(c, c.a_rule);
  require_clean_rows(out, r);
  const GridAggregate& g = r.aggregates.front();
  out.require(g.coverage >= 0.925 && g.coverage <= 0.970, "coverage " + fmt(g.coverage));
  out.require(g.z_var >= 0.85 && g.z_var <= 1.15, "z variance " + fmt(g.z_var));
  out.require(g.qq_corr >= 0.99, "QQ correlation " + fmt(g.qq_corr));
  out.detail = (out.pass ? "" : out.detail + "; ") + "coverage " + fmt(g.coverage) + ", z mean " +
               fmt(g.z_mean) + ", z variance " + fmt(g.z_var) + ", QQ correlation " + fmt(g.qq_corr);
  return out;
}

// 7. Breakdown probe.
Outcome breakdown() {
  Outcome out;
  ScenarioConfig c = bundled("breakdown");
  require_grid(out, c, {200}, 200);
  out.require(c.dim_rule.p_for(200) == 5 && c.contamination &&
                  c.contamination->scheme == Contamination::Scheme::BadLeverage &&
                  c.contamination->fraction == 0.2 && c.estimator == EstimatorKind::MM,
              "scenario settings differ from the criterion");
  const ExperimentReport dirty = run_breakdown_experiment(c);
  c.contamination.reset();
  const ExperimentReport clean = run_breakdown_experiment(c);
  require_clean_rows(out, dirty);
  require_clean_rows(out, clean);
  const double mm = dirty.aggregates[0].median_err;
  const double mm_clean = clean.aggregates[0].median_err;
  const double ls = dirty.aggregates[0].median_baseline_err;
  out.require(mm <= 5.0 * mm_clean, "MM error " + fmt(mm) + " vs clean " + fmt(mm_clean));
  out.require(ls >= 1e3 * mm, "LS error " + fmt(ls) + " vs MM " + fmt(mm));
  if (out.pass) {
    out.detail = "median MM error " + fmt(mm) + " (clean " + fmt(mm_clean) + "), median LS error " + fmt(ls);
  }
  return out;
}

// 8. Uniform convergence.
Outcome uniform_convergence() {
  Outcome out;
  const ScenarioConfig c = bundled("uniform");
  out.require(c.n_grid == std::vector<int>{1250, 2500, 5000} && c.dim_rule.p_for(1250) == 10 &&
                  c.probes == 10000 && c.error_law.kind() == ErrorLaw::Kind::Gaussian &&
                  c.design_law.kind == DesignLaw::Kind::GaussianIdentity,
              "scenario settings differ from the criterion");
  const ExperimentReport r = run_experiment(c);
  std::string sups;
  for (std::size_t i = 0; i < r.aggregates.size(); ++i) {
    sups += (i ? ", " : "") + fmt(r.aggregates[i].sup_discrepancy);
    if (i > 0) {
      out.require(r.aggregates[i].sup_discrepancy < r.aggregates[i - 1].sup_discrepancy,
                  "sup discrepancy not decreasing: " + sups);
    }
  }
  out.require(r.aggregates.back().sup_discrepancy <= 0.05, "sup at n = 5000: " + sups);
  if (out.pass) out.detail = "sup discrepancy " + sups;
  return out;
}

// 9. Equivariance of S and MM fits.
Outcome equivariance() {
  Outcome out;
  std::mt19937_64 gen(9);
  std::normal_distribution<double> z;
  double worst = 0;
  auto rel = [](const Vector& got, const Vector& want) {
    return (got - want).norm() / std::max(want.norm(), 1.0);
  };
  for (int inst = 0; inst < 20; ++inst) {
    const int p = 2 + inst % 4;
    const int n = 60 + 10 * inst;
    const Matrix X = gaussian_matrix(gen, n, p);
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = X.row(i).sum() + (i < n / 10 ? 40.0 : z(gen));
    SFitConfig sc;
    sc.seed = static_cast<std::uint64_t>(inst);
    const MMFitConfig mc;
    Vector gamma(p);
    for (int j = 0; j < p; ++j) gamma(j) = 3.0 * z(gen);
    Matrix A(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) A(i, j) = (i == j ? 2.0 : 0.0) + 0.4 * z(gen);
    const double lambda = 7.5;
    for (int which = 0; which < 2; ++which) {
      auto fit = [&](const Matrix& Xf, const Vector& yf) {
        const RegressionProblem prob(Xf, yf);
        return which == 0 ? fit_s(prob, sc) : fit_mm(prob, sc, mc);
      };
      const FitResult base = fit(X, y);
      const FitResult sy = fit(X, lambda * y);
      worst = std::max(worst, rel(sy.beta, lambda * base.beta));
      worst = std::max(worst, std::abs(sy.scale - lambda * base.scale) / (lambda * base.scale));
      const FitResult ry = fit(X, y + X * gamma);
      worst = std::max(worst, rel(ry.beta, base.beta + gamma));
      worst = std::max(worst, std::abs(ry.scale - base.scale) / base.scale);
      const FitResult dx = fit(X * A, y);
      worst = std::max(worst, rel(dx.beta, A.fullPivLu().solve(base.beta)));
      worst = std::max(worst, std::abs(dx.scale - base.scale) / base.scale);
    }
  }
  out.require(worst <= 1e-8, "max relative deviation " + fmt(worst));
  if (out.pass) out.detail = "max relative deviation " + fmt(worst);
  return out;
}

// Exact eta for one subset in the plane: the optimum is orthogonal to some
// x_i or to some x_i +- x_j.
double subset_value(const Matrix& X, const std::vector<int>& A) {
  if (X.cols() == 1) {
    double m = 0;
    for (int i : A) m = std::max(m, std::abs(X(i, 0)));
    return m;
  }
  std::vector<Vector> dirs;
  auto add_normal = [&](double a, double b) {
    if (std::hypot(a, b) > 0) {
      Vector t(2);
      t << -b, a;
      dirs.push_back(t.normalized());
    }
  };
  for (int i : A) {
    add_normal(X(i, 0), X(i, 1));
    for (int j : A) {
      add_normal(X(i, 0) + X(j, 0), X(i, 1) + X(j, 1));
      add_normal(X(i, 0) - X(j, 0), X(i, 1) - X(j, 1));
    }
  }
  if (dirs.empty()) return 0.0;
  double best = INFINITY;
  for (const Vector& t : dirs) {
    double m = 0;
    for (int i : A) m = std::max(m, std::abs(X.row(i).dot(t)));
    best = std::min(best, m);
  }
  return best;
}

double enumerated_eta(const Matrix& X, int k) {
  const int n = static_cast<int>(X.rows());
  std::vector<int> A(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) A[static_cast<std::size_t>(i)] = i;
  double best = INFINITY;
  while (true) {
    best = std::min(best, subset_value(X, A));
    int i = k - 1;
    while (i >= 0 && A[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++A[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) A[static_cast<std::size_t>(j)] = A[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

// 10. Eta bounds against subset enumeration.
Outcome eta_sandwich() {
  Outcome out;
  std::mt19937_64 gen(10);
  std::uniform_int_distribution<int> coarse(-2, 2);
  int instances = 0;
  for (int p = 1; p <= 2; ++p) {
    for (int n = p + 1; n <= 12; ++n) {
      for (int k = 1; k < n; ++k) {
        for (int rep = 0; rep < 3; ++rep) {
          Matrix X = gaussian_matrix(gen, n, p);
          if (rep == 2)
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < p; ++j) X(i, j) = coarse(gen);
          const double alpha = (k + 0.25) / n;
          if (subset_size(n, alpha) != k) {
            out.require(false, "subset size mismatch");
            continue;
          }
          const double truth = enumerated_eta(X, k);
          const EtaBounds b = eta_n_bounds(X, alpha, 200, static_cast<std::uint64_t>(instances));
          ++instances;
          out.require(b.lower <= truth + 1e-12 && truth <= b.upper + 1e-12,
                      "sandwich fails at n = " + std::to_string(n) + ", p = " + std::to_string(p));
          out.require(b.exact.has_value() && std::abs(*b.exact - truth) <= 1e-12 * (1 + truth),
                      "exact value disagrees at n = " + std::to_string(n));
        }
      }
    }
  }
  if (out.pass) out.detail = std::to_string(instances) + " instances";
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "M-scale contract", 5, mscale_contract},
      {2, "derivative correctness", 5, derivative_agreement},
      {3, "optimizer contracts", 120, optimizer_contracts},
      {4, "scale consistency", 300, scale_consistency},
      {5, "rate", 900, rate},
      {6, "normality", 600, normality},
      {7, "breakdown probe", 300, breakdown},
      {8, "uniform convergence", 600, uniform_convergence},
      {9, "equivariance", 60, equivariance},
      {10, "eta sandwich", 60, eta_sandwich},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds) {
      o.detail += (o.detail.empty() ? "" : "; ") + std::string("runtime over ") + fmt(c.limit_seconds) + " s";
      o.pass = false;
    }
    std::printf("criterion %2d %-24s %s  %.1f s  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
