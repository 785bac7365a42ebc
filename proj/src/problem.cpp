#include "robreg/problem.hpp"

#include <cmath>

#include "robreg/errors.hpp"

namespace robreg {

RegressionProblem::RegressionProblem(Matrix X, Vector y)
    : X_(std::move(X)), y_(std::move(y)) {
  if (X_.rows() != y_.size()) {
    throw ConfigError("RegressionProblem: X has " + std::to_string(X_.rows()) +
                      " rows but y has " + std::to_string(y_.size()) +
                      " entries");
  }
  if (X_.cols() < 1) throw ConfigError("RegressionProblem: p must be >= 1");
  if (X_.rows() <= X_.cols()) {
    throw ConfigError("RegressionProblem: need n > p");
  }
  if (!X_.allFinite() || !y_.allFinite()) {
    throw DomainError("RegressionProblem: non-finite entries");
  }
}

Matrix RegressionProblem::gram() const {
  Matrix g = Matrix::Zero(p(), p());
  g.selfadjointView<Eigen::Lower>().rankUpdate(X_.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g / static_cast<double>(n());
}

Vector RegressionProblem::residuals(const Vector& beta) const {
  return y_ - X_ * beta;
}

void RegressionProblem::require_nonsingular() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("RegressionProblem: eigensolver failed");
  }
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(p() - 1);
  if (!(lo > 1e-12 * std::max(1.0, hi))) {
    throw DegenerateDesignError("RegressionProblem: Gram matrix is singular");
  }
}

bool weighted_least_squares(const Matrix& X, const Vector& y, const Vector& w,
                            Vector& beta) {
  const Eigen::Index p = X.cols();
  const Vector sw = w.cwiseSqrt();
  const Matrix Xw = X.array().colwise() * sw.array();
  Matrix A = Matrix::Zero(p, p);
  A.selfadjointView<Eigen::Lower>().rankUpdate(Xw.transpose());
  const Vector rhs = Xw.transpose() * (sw.array() * y.array()).matrix();
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) return false;
  const double diag_max = A.diagonal().maxCoeff();
  const auto& L = llt.matrixL();
  double lmin = std::abs(L(0, 0));
  for (Eigen::Index j = 1; j < p; ++j) lmin = std::min(lmin, std::abs(L(j, j)));
  if (!(lmin * lmin > 1e-13 * diag_max)) return false;
  beta = llt.solve(rhs);
  return beta.allFinite();
}

Vector least_squares(const Matrix& X, const Vector& y) {
  return X.colPivHouseholderQr().solve(y);
}

}  // namespace robreg
