#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace robreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Linear model data y = X beta + u with n > p rows.
///
/// Construction validates shapes and finiteness only; fitting routines call
/// require_nonsingular() before using the Gram matrix.
class RegressionProblem {
 public:
  RegressionProblem(Matrix X, Vector y);

  const Matrix& X() const noexcept { return X_; }
  const Vector& y() const noexcept { return y_; }
  Eigen::Index n() const noexcept { return X_.rows(); }
  Eigen::Index p() const noexcept { return X_.cols(); }

  /// Sigma_n = X^T X / n.
  Matrix gram() const;
  Vector residuals(const Vector& beta) const;

  /// Throws DegenerateDesignError if Sigma_n is numerically singular.
  void require_nonsingular() const;

 private:
  Matrix X_;
  Vector y_;
};

struct FitResult {
  Vector beta;
  double scale = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set when at least (1 - b) n residuals are (numerically) zero.
  bool exact_fit = false;
  std::vector<std::pair<int, double>> trace;
};

/// Weighted least squares: argmin sum w_i (y_i - x_i^T beta)^2.
/// Returns false when the weighted normal equations are singular.
bool weighted_least_squares(const Matrix& X, const Vector& y, const Vector& w,
                            Vector& beta);

/// Ordinary least squares via column-pivoted QR.
Vector least_squares(const Matrix& X, const Vector& y);

}  // namespace robreg
