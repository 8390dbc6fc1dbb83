#include "tgpm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tgpm/errors.hpp"

namespace tgpm::numerics {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    raise(ErrorKind::DimensionMismatch, std::string(what) + ": matrix is " +
                                            std::to_string(m.rows()) + "x" +
                                            std::to_string(m.cols()));
  }
}

}  // namespace

SpdMatrix::SpdMatrix(const Matrix& m) {
  require_square(m, "SpdMatrix");
  entries_ = 0.5 * (m + m.transpose());
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) {
  return SpdMatrix(Matrix::Identity(dim, dim));
}

SpdMatrix SpdMatrix::diagonal(const Vector& diag) {
  return SpdMatrix(Matrix(diag.asDiagonal()));
}

Matrix cholesky(const SpdMatrix& m) {
  const Matrix& a = m.matrix();
  if (a.rows() == 0) raise(ErrorKind::InvalidArgument, "cholesky of an empty matrix");
  if (!a.allFinite()) raise(ErrorKind::NotPositiveDefinite, "matrix has non-finite entries");

  const double scale = a.diagonal().maxCoeff();
  if (!(scale > 0.0)) {
    raise(ErrorKind::NotPositiveDefinite, "largest diagonal entry is not positive");
  }
  const double tol = kPivotTolerance * scale;

  // Plain left-looking factorization so the pivot test sees every Schur
  // complement diagonal before the square root.
  const Eigen::Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > tol)) {
      raise(ErrorKind::NotPositiveDefinite,
            "pivot " + std::to_string(j) + " is " + std::to_string(pivot) +
                " (tolerance " + std::to_string(tol) + ")");
    }
    const double root = std::sqrt(pivot);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / root;
    }
  }
  return l;
}

SpdMatrix invert_spd(const SpdMatrix& m) {
  const Matrix l = cholesky(m);
  const Eigen::Index n = l.rows();
  // L^{-1} by forward substitution, then (L L^T)^{-1} = L^{-T} L^{-1}.
  Matrix l_inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
  return SpdMatrix(l_inv.transpose() * l_inv);
}

SpdMatrix inv_sqrt_spd(const SpdMatrix& m) {
  cholesky(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix());
  if (eig.info() != Eigen::Success) {
    raise(ErrorKind::NotPositiveDefinite, "eigendecomposition failed");
  }
  const Vector inv_root = eig.eigenvalues().array().rsqrt();
  const Matrix& v = eig.eigenvectors();
  return SpdMatrix(v * inv_root.asDiagonal() * v.transpose());
}

double log_det_spd(const SpdMatrix& m) {
  const Matrix l = cholesky(m);
  return 2.0 * l.diagonal().array().log().sum();
}

MomentSummary sample_moments(const Matrix& values, bool demean) {
  const auto n = values.rows();
  if (n < 2) {
    raise(ErrorKind::InsufficientData,
          "sample moments need at least 2 rows, got " + std::to_string(n));
  }
  MomentSummary out;
  out.n = static_cast<std::size_t>(n);
  out.demean = demean;
  out.mean = values.colwise().mean().transpose();
  const Matrix centered = values.rowwise() - out.mean.transpose();
  out.covariance = SpdMatrix((centered.transpose() * centered) / static_cast<double>(n - 1));
  return out;
}

double mahalanobis(const Vector& x, const Vector& mu, const Matrix& precision) {
  if (x.size() != mu.size() || precision.rows() != x.size() || precision.cols() != x.size()) {
    raise(ErrorKind::DimensionMismatch, "mahalanobis: x, mu and precision disagree in size");
  }
  const Vector diff = x - mu;
  return std::max(0.0, diff.dot(precision * diff));
}

double mahalanobis(const Vector& x, const Vector& mu, const SpdMatrix& precision) {
  return mahalanobis(x, mu, precision.matrix());
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    raise(ErrorKind::DimensionMismatch, "frobenius_distance: shapes differ");
  }
  return (a - b).norm();
}

Matrix fourth_moment_matrix(const Matrix& standardized) {
  const auto n = standardized.rows();
  if (n < 1) raise(ErrorKind::InsufficientData, "fourth moment of an empty sample");
  const auto d = standardized.cols();
  Matrix acc = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector y = standardized.row(i).transpose();
    acc.noalias() += y.squaredNorm() * (y * y.transpose());
  }
  acc /= static_cast<double>(n);
  return 0.5 * (acc + acc.transpose());
}

Matrix mori_kurtosis(const Matrix& standardized) {
  const auto d = standardized.cols();
  return fourth_moment_matrix(standardized) -
         static_cast<double>(d + 2) * Matrix::Identity(d, d);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double relative_frobenius_error(const Matrix& estimate, const Matrix& reference) {
  return (estimate - reference).norm() / reference.norm();
}

}  // namespace tgpm::numerics
