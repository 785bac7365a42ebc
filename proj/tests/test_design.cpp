#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "robreg/design.hpp"
#include "robreg/errors.hpp"

using namespace robreg;

namespace {

Matrix gaussian_matrix(std::mt19937_64& gen, int n, int p) {
  std::normal_distribution<double> z;
  Matrix X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = z(gen);
  return X;
}

// min over unit theta of max_{i in A} |x_i^T theta| for one subset, p <= 2.
// In the plane the optimum is attained orthogonal to some x_i or to some
// x_i +- x_j with i, j in A.
double subset_value(const Matrix& X, const std::vector<int>& A) {
  if (X.cols() == 1) {
    double m = 0;
    for (int i : A) m = std::max(m, std::abs(X(i, 0)));
    return m;
  }
  std::vector<Eigen::Vector2d> dirs;
  auto add_normal = [&](const Eigen::Vector2d& v) {
    if (v.norm() > 0) dirs.push_back(Eigen::Vector2d(-v(1), v(0)).normalized());
  };
  for (int i : A) {
    const Eigen::Vector2d xi = X.row(i).transpose();
    add_normal(xi);
    for (int j : A) {
      const Eigen::Vector2d xj = X.row(j).transpose();
      add_normal(xi + xj);
      add_normal(xi - xj);
    }
  }
  if (dirs.empty()) return 0.0;
  double best = INFINITY;
  for (const auto& t : dirs) {
    double m = 0;
    for (int i : A) m = std::max(m, std::abs(X.row(i).dot(t.transpose())));
    best = std::min(best, m);
  }
  return best;
}

template <typename F>
void for_each_subset(int n, int k, F&& f) {
  std::vector<int> A(k);
  for (int i = 0; i < k; ++i) A[i] = i;
  while (true) {
    f(A);
    int i = k - 1;
    while (i >= 0 && A[i] == n - k + i) --i;
    if (i < 0) return;
    ++A[i];
    for (int j = i + 1; j < k; ++j) A[j] = A[j - 1] + 1;
  }
}

double enumerated_eta(const Matrix& X, double alpha) {
  const int k = static_cast<int>(subset_size(X.rows(), alpha));
  double best = INFINITY;
  for_each_subset(static_cast<int>(X.rows()), k,
                  [&](const std::vector<int>& A) { best = std::min(best, subset_value(X, A)); });
  return best;
}

double min_subset_eigenvalue(const Matrix& X, double alpha) {
  const int k = static_cast<int>(subset_size(X.rows(), alpha));
  double best = INFINITY;
  for_each_subset(static_cast<int>(X.rows()), k, [&](const std::vector<int>& A) {
    Matrix S = Matrix::Zero(X.cols(), X.cols());
    for (int i : A) S += X.row(i).transpose() * X.row(i);
    S /= static_cast<double>(k);
    best = std::min(best, Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues()(0));
  });
  return best;
}

}  // namespace

TEST_CASE("spectrum bounds") {
  Matrix X(40, 4);
  for (int i = 0; i < 40; ++i) X.row(i) = 2.0 * Matrix::Identity(4, 4).row(i % 4);
  const SpectrumBounds sb = spectrum_bounds(X);
  CHECK(sb.rho1n == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sb.rho2n == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 gen(1);
  Matrix G = gaussian_matrix(gen, 500, 10);
  const SpectrumBounds g = spectrum_bounds(G);
  CHECK(g.rho1n >= 0.5);
  CHECK(g.rho2n <= 1.5);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G.transpose() * G / 500.0);
  CHECK(g.rho1n == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-12));
  CHECK(g.rho2n == doctest::Approx(es.eigenvalues()(9)).epsilon(1e-12));

  Matrix D = gaussian_matrix(gen, 50, 3);
  D.col(2) = D.col(1);
  CHECK(spectrum_bounds(D).rho1n <= 1e-12);
  CHECK(check_conditions(D, 0.5, 0.5).singular);
  CHECK_FALSE(check_conditions(G, 0.5, 0.5).singular);
}

TEST_CASE("eta examples") {
  Matrix x(3, 1);
  x << 1.0, 2.0, 3.0;
  const EtaBounds e = eta_n_bounds(x, 2.0 / 3.0, 100, 1);
  REQUIRE(e.exact.has_value());
  CHECK(*e.exact == 2.0);
  CHECK(e.lower == 2.0);
  CHECK(e.upper == 2.0);
  CHECK(e.lower_certified);
  CHECK(eta_n_exact(x, 2.0 / 3.0) == 2.0);
  CHECK(order_statistic(x, Vector::Constant(1, -1.0), 2) == 2.0);

  for (int p : {2, 3, 5}) {
    Matrix E = Matrix::Zero(30, p);
    E.col(0).setOnes();
    const EtaBounds b = eta_n_bounds(E, 0.5, 200, 2);
    CHECK(b.upper == doctest::Approx(0.0).scale(1.0));
    CHECK(b.lower == doctest::Approx(0.0).scale(1.0));
  }
  CHECK_THROWS_AS(eta_n_exact(Matrix::Ones(10, 3), 0.5), ConfigError);
}

TEST_CASE("eta bounds sandwich subset enumeration") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> ndist(3, 12);
  std::uniform_real_distribution<double> adist(0.05, 0.95);
  std::uniform_int_distribution<int> coarse(-2, 2);
  for (int trial = 0; trial < 60; ++trial) {
    const int p = 1 + trial % 2;
    const int n = std::max(ndist(gen), p + 1);
    double alpha = adist(gen);
    if (std::floor(n * alpha) < 1) alpha = 1.0 / n;
    // Every third instance has repeated integer rows.
    Matrix X = trial % 3 == 0 ? Matrix(n, p) : gaussian_matrix(gen, n, p);
    if (trial % 3 == 0)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = coarse(gen);
    const double truth = enumerated_eta(X, alpha);
    const EtaBounds b = eta_n_bounds(X, alpha, 500, static_cast<std::uint64_t>(trial));
    CHECK(b.lower <= truth + 1e-12);
    CHECK(b.upper >= truth - 1e-12);
    CHECK(b.lower_certified);
    REQUIRE(b.exact.has_value());
    CHECK(*b.exact == doctest::Approx(truth).epsilon(1e-12).scale(1.0));
    CHECK(min_subset_eigenvalue(X, alpha) <= truth * truth + 1e-12);
  }
}

TEST_CASE("eta grows with alpha and scales with the design") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix X = gaussian_matrix(gen, 10, 2);
    double prev = -1;
    for (double alpha = 0.1; alpha <= 1.0; alpha += 0.1) {
      const double v = eta_n_exact(X, alpha);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    const double base = eta_n_exact(X, 0.5);
    CHECK(eta_n_exact(2.5 * X, 0.5) == doctest::Approx(2.5 * base).epsilon(1e-12));
    const SpectrumBounds s1 = spectrum_bounds(X), s2 = spectrum_bounds(2.5 * X);
    CHECK(s2.rho1n == doctest::Approx(6.25 * s1.rho1n).epsilon(1e-12));
    const EtaBounds b1 = eta_n_bounds(X, 0.5, 300, 9), b2 = eta_n_bounds(2.5 * X, 0.5, 300, 9);
    CHECK(b2.upper == doctest::Approx(2.5 * b1.upper).epsilon(1e-12));
    CHECK(b2.lower == doctest::Approx(2.5 * b1.lower).epsilon(1e-12));
  }
}

TEST_CASE("eta lower bound on Gaussian designs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 gen(seed);
    const Matrix X = gaussian_matrix(gen, 400, 5);
    const EtaBounds b = eta_n_bounds(X, 0.9, 1000, seed);
    CHECK(b.lower > 0.1);
    CHECK(b.lower <= b.upper);
    CHECK_FALSE(b.lower_certified);
  }
}

TEST_CASE("truncated gram check") {
  std::mt19937_64 gen(7);
  Matrix big = gaussian_matrix(gen, 50, 3);
  for (int i = 0; i < 50; ++i) big.row(i) = big.row(i).normalized() * 10.0;
  CHECK(truncated_gram_check(big, 1.0, 0.3) == doctest::Approx(-0.3));

  Matrix I(60, 3);
  for (int i = 0; i < 60; ++i) I.row(i) = std::sqrt(3.0) * Matrix::Identity(3, 3).row(i % 3);
  CHECK(truncated_gram_check(I, 1e6, 0.5) == doctest::Approx(0.5));

  const Matrix G = gaussian_matrix(gen, 500, 5);
  const DesignReport rep = check_conditions(G, 0.5, 0.5);
  const double M = (G.rowwise().squaredNorm().sum() / 500.0) / 5.0;
  CHECK(rep.x1a_value == doctest::Approx(M));
  CHECK(rep.eta1 == doctest::Approx(std::sqrt(2 * M / 0.5)));
  CHECK(truncated_gram_check(G, rep.eta1, 0.1) > 0.0);
  CHECK(rep.truncated_gram_mineig == doctest::Approx(truncated_gram_check(G, rep.eta1, 0.0)));
  CHECK(rep.eta2_max_passing > 0.0);
}

TEST_CASE("condition report") {
  std::mt19937_64 gen(3);
  const DesignReport wide = check_conditions(gaussian_matrix(gen, 100, 60), 0.5, 0.5);
  CHECK_FALSE(wide.x0_ok);
  const DesignReport ok = check_conditions(gaussian_matrix(gen, 100, 49), 0.5, 0.5);
  CHECK(ok.x0_ok);

  Matrix S = gaussian_matrix(gen, 1000, 4);
  for (int j = 0; j < 4; ++j) {
    S.col(j).array() -= S.col(j).mean();
    S.col(j) /= std::sqrt(S.col(j).squaredNorm() / 1000.0);
  }
  const DesignReport st = check_conditions(S, 0.5, 0.5);
  CHECK(st.x1a_value <= 1.0 + 1e-12);

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix B(10000, 10);
  for (int i = 0; i < B.rows(); ++i)
    for (int j = 0; j < 10; ++j) B(i, j) = u(gen);
  const DesignReport br = check_conditions(B, 0.5, 0.5);
  CHECK(br.x6_ratio < 1.0);
  CHECK(br.x6_ratio == doctest::Approx(B.rowwise().squaredNorm().maxCoeff() * 100.0 / 10000.0));
  CHECK(br.x1b_value == doctest::Approx(B.rowwise().norm().maxCoeff() / 10000.0));
  CHECK(br.rho1n <= br.rho2n);
  CHECK(br.eta_lower <= br.eta_upper);
  CHECK(br.tau_ok);
  CHECK(br.x4_probe_min >= 0.0);
  CHECK(br.x5_probe_max >= 0.0);

  const auto j = to_json(br);
  for (const char* key : {"rho1n", "rho2n", "tau_check", "x1a_value", "x1b_value", "x6_ratio",
                          "eta_lower", "eta_upper", "alpha", "x0_ok", "truncated_gram_mineig"}) {
    CHECK(j.contains(key));
  }
}
