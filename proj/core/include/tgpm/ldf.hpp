#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "tgpm/numerics.hpp"

namespace tgpm::ldf {

using numerics::SpdMatrix;

/// Matrix of mixed partials d^2 log f / dx_p dx_q at one point.
using LdfMatrix = Matrix;

/// Location, scatter matrix and degrees of freedom of a multivariate t law.
/// `sigma` is the matrix that appears inside the quadratic form of the
/// density; for nu > 2 the covariance is nu / (nu - 2) * sigma.
struct TStudentParams {
  Vector mu;
  SpdMatrix sigma;
  double nu = 6.0;

  Eigen::Index dim() const noexcept { return sigma.dim(); }
  bool has_covariance() const noexcept { return nu > 2.0; }

  // Throws InvalidArgument / DimensionMismatch.
  void validate() const;

  static TStudentParams bivariate(double rho, double nu);
};

/// A validated t law with its precision matrix and normalizing constant
/// cached, for repeated density and LDF evaluation.
class TStudentModel {
 public:
  explicit TStudentModel(TStudentParams params);

  const TStudentParams& params() const noexcept { return params_; }
  const Matrix& precision() const noexcept { return precision_; }
  Eigen::Index dim() const noexcept { return params_.dim(); }

  double quadratic_form(const Vector& x) const;
  double log_normalizer() const noexcept { return log_k_; }
  double log_density(const Vector& x) const;
  LdfMatrix ldf_exact(const Vector& x) const;
  // Third-order expansion of log f around delta = 0; accurate for small delta.
  LdfMatrix ldf_taylor(const Vector& x) const;

 private:
  TStudentParams params_;
  Matrix precision_;
  double log_k_ = 0.0;
};

double t_log_density(const Vector& x, const TStudentParams& params);
LdfMatrix ldf_t_exact(const Vector& x, const TStudentParams& params);
LdfMatrix ldf_t_taylor(const Vector& x, const TStudentParams& params);

/// The Gaussian LDF is constant: -Sigma^{-1}.
LdfMatrix ldf_gaussian(const SpdMatrix& sigma);
double gaussian_log_density(const Vector& x, const Vector& mu, const SpdMatrix& sigma);

inline constexpr double kDefaultStep = 1e-4;

using LogDensity = std::function<double(const Vector&)>;

/// Central-difference Hessian of an arbitrary log-density. Off-diagonal
/// entries use the four-point cross stencil, diagonal entries the
/// three-point second difference. Raises NonFiniteDensity if any stencil
/// evaluation is not finite.
LdfMatrix ldf_numeric(const LogDensity& log_density, const Vector& x, double h = kDefaultStep);

struct GridAxis {
  double min = -4.0;
  double max = 4.0;
  std::size_t steps = 101;

  // Endpoints are hit exactly and symmetric ranges give exactly mirrored values.
  std::vector<double> values() const;
};

struct LdfGrid {
  std::pair<Eigen::Index, Eigen::Index> pair{0, 1};
  std::vector<double> x_values;
  std::vector<double> y_values;
  Matrix values;  // values(i, j) = gamma at (x_values[i], y_values[j])
  Vector conditioning_point;
};

/// Tabulates entry (p, q) of ldf_t_exact over a grid in (x_p, x_q), holding
/// the remaining coordinates at `conditioning_point` (zero by default).
LdfGrid ldf_grid(const TStudentParams& params, std::pair<Eigen::Index, Eigen::Index> pair,
                 const GridAxis& x_axis, const GridAxis& y_axis,
                 const std::optional<Vector>& conditioning_point = std::nullopt);

/// CSV with header `x,y,gamma`, row-major over x then y, %.17g floats.
void write_ldf_grid_csv(std::ostream& out, const LdfGrid& grid);

}  // namespace tgpm::ldf
