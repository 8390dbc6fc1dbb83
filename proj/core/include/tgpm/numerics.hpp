#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace tgpm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace numerics {

/// Symmetric matrix intended to be positive definite.
///
/// Construction symmetrizes the input as (M + M^T) / 2, so tiny asymmetries
/// from accumulated outer products never leak into downstream algebra.
/// Positive definiteness is established lazily: every factorization routine
/// in this header raises ErrorKind::NotPositiveDefinite when a pivot falls
/// below kPivotTolerance times the largest diagonal entry.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(const Matrix& m);

  static SpdMatrix identity(Eigen::Index dim);
  static SpdMatrix diagonal(const Vector& diag);

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Matrix& matrix() const noexcept { return entries_; }
  double operator()(Eigen::Index p, Eigen::Index q) const { return entries_(p, q); }

 private:
  Matrix entries_;
};

inline constexpr double kPivotTolerance = 1e-12;

struct MomentSummary {
  Vector mean;
  SpdMatrix covariance;
  std::size_t n = 0;
  // Whether estimators should subtract `mean` before use. The covariance is
  // always computed on centered data.
  bool demean = true;
};

Matrix cholesky(const SpdMatrix& m);
SpdMatrix invert_spd(const SpdMatrix& m);
// Symmetric inverse square root V diag(lambda^{-1/2}) V^T.
SpdMatrix inv_sqrt_spd(const SpdMatrix& m);
double log_det_spd(const SpdMatrix& m);

/// Column means and the (n-1)-divisor covariance of a T x N panel.
MomentSummary sample_moments(const Matrix& values, bool demean = true);

double mahalanobis(const Vector& x, const Vector& mu, const SpdMatrix& precision);
double mahalanobis(const Vector& x, const Vector& mu, const Matrix& precision);

double frobenius_distance(const Matrix& a, const Matrix& b);
inline double frobenius_distance(const SpdMatrix& a, const SpdMatrix& b) {
  return frobenius_distance(a.matrix(), b.matrix());
}

/// (1/n) sum_i (y_i^T y_i) y_i y_i^T for the rows y_i of `standardized`.
Matrix fourth_moment_matrix(const Matrix& standardized);

/// Empirical Mori kurtosis matrix: fourth_moment_matrix(y) - (d + 2) I.
/// Converges to zero for Gaussian data.
Matrix mori_kurtosis(const Matrix& standardized);

double max_abs(const Matrix& m);
double relative_frobenius_error(const Matrix& estimate, const Matrix& reference);

}  // namespace numerics
}  // namespace tgpm
