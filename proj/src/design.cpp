#include "robreg/design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "robreg/errors.hpp"
#include "robreg/rng.hpp"

namespace robreg {

namespace {

double min_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return es.eigenvalues()(0);
}

Vector random_unit(Rng& rng, Eigen::Index p) {
  std::normal_distribution<double> z;
  Vector v(p);
  do {
    for (Eigen::Index j = 0; j < p; ++j) v(j) = z(rng);
  } while (!(v.norm() > 0.0));
  return v.normalized();
}

// Unit vector orthogonal to the given rows (p - 1 of them), or empty when
// the kernel is trivial.
Vector orthogonal_direction(const Matrix& rows) {
  const Eigen::Index p = rows.cols();
  Eigen::FullPivLU<Matrix> lu(rows);
  const Matrix kernel = lu.kernel();
  if (kernel.cols() < 1 || kernel.rows() != p) return {};
  const Vector v = kernel.col(0);
  const double nv = v.norm();
  if (!(nv > 0.0)) return {};
  return v / nv;
}

double max_row_norm(const Matrix& X) { return X.rowwise().norm().maxCoeff(); }

// log C(n, k)
double log_binomial(Eigen::Index n, Eigen::Index k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

SpectrumBounds spectrum_bounds(const Matrix& X) {
  const Eigen::Index n = X.rows();
  if (n == 0 || X.cols() == 0) throw ConfigError("spectrum_bounds: empty design");
  const Matrix S = (X.transpose() * X) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("spectrum_bounds: eigensolver failed");
  return {std::max(0.0, es.eigenvalues()(0)), es.eigenvalues()(X.cols() - 1)};
}

Eigen::Index subset_size(Eigen::Index n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const auto k = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * alpha + 1e-9));
  if (k < 1 || k > n) throw ConfigError("[n alpha] must lie in [1, n]");
  return k;
}

double order_statistic(const Matrix& X, const Vector& theta, Eigen::Index k) {
  std::vector<double> v(static_cast<std::size_t>(X.rows()));
  const Vector proj = X * theta;
  for (Eigen::Index i = 0; i < proj.size(); ++i) v[static_cast<std::size_t>(i)] = std::abs(proj(i));
  auto kth = v.begin() + (k - 1);
  std::nth_element(v.begin(), kth, v.end());
  return *kth;
}

double eta_n_exact(const Matrix& X, double alpha) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const Eigen::Index k = subset_size(n, alpha);
  if (p == 1) return order_statistic(X, Vector::Ones(1), k);
  if (p != 2) throw ConfigError("eta_n_exact: only p <= 2 is supported");

  double best = order_statistic(X, Vector::Unit(2, 0), k);
  auto try_normal_to = [&](double a, double b) {
    const double len = std::hypot(a, b);
    if (!(len > 0.0)) return;
    Vector theta(2);
    theta << -b / len, a / len;
    best = std::min(best, order_statistic(X, theta, k));
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    try_normal_to(X(i, 0), X(i, 1));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      try_normal_to(X(i, 0) - X(j, 0), X(i, 1) - X(j, 1));
      try_normal_to(X(i, 0) + X(j, 0), X(i, 1) + X(j, 1));
    }
  }
  return best;
}

EtaBounds eta_n_bounds(const Matrix& X, double alpha, int n_directions,
                       std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const Eigen::Index k = subset_size(n, alpha);
  if (n_directions < 1) throw ConfigError("eta_n_bounds: n_directions must be >= 1");

  EtaBounds out;
  if (p == 1) {
    const double v = order_statistic(X, Vector::Ones(1), k);
    out.lower = out.upper = v;
    out.exact = v;
    out.lower_certified = true;
    return out;
  }

  struct Scored {
    double value;
    Vector theta;
  };
  std::vector<Scored> scored;
  scored.reserve(static_cast<std::size_t>(2 * n_directions));
  Rng rng(seed, {0x657461ULL});
  for (int d = 0; d < n_directions; ++d) {
    Vector theta = random_unit(rng, p);
    scored.push_back({order_statistic(X, theta, k), std::move(theta)});
  }
  Matrix rows(p - 1, p);
  for (int d = 0; d < n_directions; ++d) {
    std::vector<Eigen::Index> idx;
    while (static_cast<Eigen::Index>(idx.size()) < p - 1) {
      const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    for (Eigen::Index j = 0; j < p - 1; ++j) rows.row(j) = X.row(idx[static_cast<std::size_t>(j)]);
    Vector theta = orthogonal_direction(rows);
    if (theta.size() == 0) continue;
    scored.push_back({order_statistic(X, theta, k), std::move(theta)});
  }
  std::sort(scored.begin(), scored.end(),
            [](const Scored& a, const Scored& b) { return a.value < b.value; });
  out.upper = scored.front().value;

  if (p == 2) {
    const int N = std::max(n_directions, 16);
    double net_min = out.upper;
    for (int j = 0; j < N; ++j) {
      const double phi = std::numbers::pi * static_cast<double>(j) / N;
      Vector theta(2);
      theta << std::cos(phi), std::sin(phi);
      net_min = std::min(net_min, order_statistic(X, theta, k));
    }
    out.upper = std::min(out.upper, net_min);
    const double lipschitz = max_row_norm(X);
    out.lower = std::max(0.0, net_min - lipschitz * std::numbers::pi / (2.0 * N));
    out.lower_certified = true;
    if (log_binomial(n, k) <= std::log(1e5)) out.exact = eta_n_exact(X, alpha);
    return out;
  }

  // Adversarial subsets of the best directions: lambda_min(Sigma(A)) <=
  // theta^T Sigma(A) theta <= order_statistic(theta)^2.
  const std::size_t probes = std::min<std::size_t>(scored.size(), 10);
  double lam = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Eigen::Index>> proj(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < probes; ++s) {
    const Vector pr = X * scored[s].theta;
    for (Eigen::Index i = 0; i < n; ++i) proj[static_cast<std::size_t>(i)] = {std::abs(pr(i)), i};
    std::nth_element(proj.begin(), proj.begin() + (k - 1), proj.end());
    Matrix S = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto row = X.row(proj[static_cast<std::size_t>(i)].second);
      S.noalias() += row.transpose() * row;
    }
    lam = std::min(lam, min_eigenvalue(S / static_cast<double>(k)));
  }
  out.lower = std::sqrt(std::max(0.0, lam));
  out.lower_certified = false;
  return out;
}

double truncated_gram_check(const Matrix& X, double eta1, double eta2) {
  if (!(eta1 > 0.0) || !(eta2 >= 0.0)) {
    throw ConfigError("truncated_gram_check: eta1 must be positive, eta2 nonnegative");
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const double cut = eta1 * std::sqrt(static_cast<double>(p));
  Matrix S = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (X.row(i).norm() < cut) S.noalias() += X.row(i).transpose() * X.row(i);
  }
  S /= static_cast<double>(n);
  S.diagonal().array() -= eta2;
  return min_eigenvalue(S);
}

DesignReport check_conditions(const Matrix& X, double b, double alpha,
                              const ConditionProbe& probe) {
  if (!(b > 0.0 && b < 1.0)) throw ConfigError("check_conditions: b must lie in (0, 1)");
  DesignReport r;
  r.n = X.rows();
  r.p = X.cols();
  r.alpha = alpha;
  r.b = b;
  r.probe = probe;
  const double n = static_cast<double>(r.n);
  const double p = static_cast<double>(r.p);

  const SpectrumBounds sb = spectrum_bounds(X);
  r.rho1n = sb.rho1n;
  r.rho2n = sb.rho2n;
  r.singular = !(sb.rho1n > 1e-12 * std::max(1.0, sb.rho2n));
  r.tau_value = sb.rho2n;
  r.tau_ok = std::isfinite(sb.rho2n);

  const Vector sq = X.rowwise().squaredNorm();
  r.x1a_value = sq.sum() / n / p;
  r.x1b_value = std::sqrt(sq.maxCoeff()) / n;
  r.x6_ratio = sq.maxCoeff() * p * p / n;

  const EtaBounds eb = eta_n_bounds(X, alpha, probe.n_directions, probe.seed);
  r.eta_lower = eb.lower;
  r.eta_upper = eb.upper;
  r.eta_lower_certified = eb.lower_certified;
  r.eta_exact = eb.exact;

  r.x0_ok = p < std::floor(n * (1.0 - b));

  r.eta1 = std::sqrt(2.0 * r.x1a_value / (1.0 - alpha));
  if (r.eta1 > 0.0) {
    r.truncated_gram_mineig = truncated_gram_check(X, r.eta1, 0.0);
    for (int e = 0; e <= 30; ++e) {
      const double eta2 = std::ldexp(1.0, -e);
      if (truncated_gram_check(X, r.eta1, eta2) > 0.0) {
        r.eta2_max_passing = eta2;
        break;
      }
    }
  }

  Rng rng(probe.seed, {0x7834ULL});
  double x4 = std::numeric_limits<double>::infinity();
  double x5 = 0.0;
  for (int s = 0; s < probe.samples; ++s) {
    const Vector dir = random_unit(rng, r.p);
    const double radius = probe.delta * std::pow(rng.uniform(), 1.0 / p);
    const Vector beta = radius * dir;
    const Vector z = random_unit(rng, r.p);
    const Vector xb = X * beta;
    const Vector xz = X * z;
    double inside = 0.0, outside = 0.0;
    for (Eigen::Index i = 0; i < r.n; ++i) {
      const double v = xz(i) * xz(i);
      if (std::abs(xb(i)) <= probe.c && std::abs(xz(i)) <= probe.C) {
        inside += v;
      } else {
        outside += v;
      }
    }
    x4 = std::min(x4, inside / n);
    x5 = std::max(x5, outside / n);
  }
  r.x4_probe_min = probe.samples > 0 ? x4 : 0.0;
  r.x5_probe_max = x5;
  return r;
}

nlohmann::json to_json(const DesignReport& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["p"] = r.p;
  j["rho1n"] = r.rho1n;
  j["rho2n"] = r.rho2n;
  j["singular"] = r.singular;
  j["tau_check"] = {{"ok", r.tau_ok}, {"value", r.tau_value}};
  j["x1a_value"] = r.x1a_value;
  j["x1b_value"] = r.x1b_value;
  j["x6_ratio"] = r.x6_ratio;
  j["alpha"] = r.alpha;
  j["eta_lower"] = r.eta_lower;
  j["eta_upper"] = r.eta_upper;
  j["eta_lower_certified"] = r.eta_lower_certified;
  j["eta_exact"] = r.eta_exact ? nlohmann::json(*r.eta_exact) : nlohmann::json(nullptr);
  j["b"] = r.b;
  j["x0_ok"] = r.x0_ok;
  j["eta1"] = r.eta1;
  j["truncated_gram_mineig"] = r.truncated_gram_mineig;
  j["eta2_max_passing"] = r.eta2_max_passing;
  j["x4_probe_min"] = r.x4_probe_min;
  j["x5_probe_max"] = r.x5_probe_max;
  j["probe"] = {{"c", r.probe.c},
                {"C", r.probe.C},
                {"delta", r.probe.delta},
                {"samples", r.probe.samples},
                {"n_directions", r.probe.n_directions},
                {"seed", r.probe.seed}};
  return j;
}

}  // namespace robreg
