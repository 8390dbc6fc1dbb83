#include "tgpm/ldf.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "tgpm/errors.hpp"
#include "tgpm/text.hpp"

namespace tgpm::ldf {

void TStudentParams::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    raise(ErrorKind::InvalidArgument, "degrees of freedom must be positive, got " + format_double(nu));
  }
  if (sigma.dim() == 0) raise(ErrorKind::InvalidArgument, "empty scatter matrix");
  if (mu.size() != sigma.dim()) {
    raise(ErrorKind::DimensionMismatch, "location has " + std::to_string(mu.size()) +
                                            " entries but scatter is " +
                                            std::to_string(sigma.dim()) + "-dimensional");
  }
}

TStudentParams TStudentParams::bivariate(double rho, double nu) {
  Matrix s(2, 2);
  s << 1.0, rho, rho, 1.0;
  return TStudentParams{Vector::Zero(2), SpdMatrix(s), nu};
}

TStudentModel::TStudentModel(TStudentParams params) : params_(std::move(params)) {
  params_.validate();
  precision_ = numerics::invert_spd(params_.sigma).matrix();
  const double d = static_cast<double>(dim());
  const double nu = params_.nu;
  log_k_ = std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
           0.5 * d * std::log(nu * std::numbers::pi) - 0.5 * numerics::log_det_spd(params_.sigma);
}

double TStudentModel::quadratic_form(const Vector& x) const {
  return numerics::mahalanobis(x, params_.mu, precision_);
}

double TStudentModel::log_density(const Vector& x) const {
  const double nu = params_.nu;
  const double d = static_cast<double>(dim());
  return log_k_ - 0.5 * (nu + d) * std::log1p(quadratic_form(x) / nu);
}

LdfMatrix TStudentModel::ldf_exact(const Vector& x) const {
  if (x.size() != dim()) raise(ErrorKind::DimensionMismatch, "ldf_exact: point dimension");
  const double nu = params_.nu;
  const double d = static_cast<double>(dim());
  const Vector z = precision_ * (x - params_.mu);
  const double u = z.dot(x - params_.mu) / nu;
  const double a = 1.0 / (1.0 + u);
  LdfMatrix g = -((nu + d) / nu) * (a * precision_ - (2.0 * a * a / nu) * (z * z.transpose()));
  return 0.5 * (g + g.transpose());
}

LdfMatrix TStudentModel::ldf_taylor(const Vector& x) const {
  if (x.size() != dim()) raise(ErrorKind::DimensionMismatch, "ldf_taylor: point dimension");
  const double nu = params_.nu;
  const double d = static_cast<double>(dim());
  const Vector diff = x - params_.mu;
  const Vector grad = 2.0 * (precision_ * diff);  // delta'
  const Matrix hess = 2.0 * precision_;           // delta''
  const double u = 0.5 * grad.dot(diff) / nu;     // delta / nu
  LdfMatrix g = -0.5 * (nu + d) *
                ((1.0 / nu) * (1.0 - u + u * u) * hess -
                 (1.0 / (nu * nu)) * (1.0 - 2.0 * u) * (grad * grad.transpose()));
  return 0.5 * (g + g.transpose());
}

double t_log_density(const Vector& x, const TStudentParams& params) {
  return TStudentModel(params).log_density(x);
}

LdfMatrix ldf_t_exact(const Vector& x, const TStudentParams& params) {
  return TStudentModel(params).ldf_exact(x);
}

LdfMatrix ldf_t_taylor(const Vector& x, const TStudentParams& params) {
  return TStudentModel(params).ldf_taylor(x);
}

LdfMatrix ldf_gaussian(const SpdMatrix& sigma) { return -numerics::invert_spd(sigma).matrix(); }

double gaussian_log_density(const Vector& x, const Vector& mu, const SpdMatrix& sigma) {
  const double d = static_cast<double>(sigma.dim());
  const double delta = numerics::mahalanobis(x, mu, numerics::invert_spd(sigma));
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + numerics::log_det_spd(sigma) + delta);
}

LdfMatrix ldf_numeric(const LogDensity& log_density, const Vector& x, double h) {
  if (!(h > 0.0)) raise(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  const auto d = x.size();
  auto eval = [&](const Vector& at) {
    const double v = log_density(at);
    if (!std::isfinite(v)) raise(ErrorKind::NonFiniteDensity, "log-density is not finite in the stencil");
    return v;
  };

  LdfMatrix out(d, d);
  const double f0 = eval(x);
  Vector pt = x;
  for (Eigen::Index p = 0; p < d; ++p) {
    pt(p) = x(p) + h;
    const double fp = eval(pt);
    pt(p) = x(p) - h;
    const double fm = eval(pt);
    pt(p) = x(p);
    out(p, p) = (fp - 2.0 * f0 + fm) / (h * h);

    for (Eigen::Index q = p + 1; q < d; ++q) {
      auto corner = [&](double sp, double sq) {
        pt(p) = x(p) + sp * h;
        pt(q) = x(q) + sq * h;
        const double v = eval(pt);
        pt(p) = x(p);
        pt(q) = x(q);
        return v;
      };
      const double fpp = corner(1, 1);
      const double fpm = corner(1, -1);
      const double fmp = corner(-1, 1);
      const double fmm = corner(-1, -1);
      out(p, q) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      out(q, p) = out(p, q);
    }
  }
  return out;
}

std::vector<double> GridAxis::values() const {
  if (steps < 2) raise(ErrorKind::InvalidArgument, "grid axis needs at least 2 steps");
  if (!(max > min)) raise(ErrorKind::InvalidArgument, "grid axis needs max > min");
  std::vector<double> out(steps);
  const double last = static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    const double k = static_cast<double>(i);
    out[i] = ((last - k) * min + k * max) / last;
  }
  return out;
}

LdfGrid ldf_grid(const TStudentParams& params, std::pair<Eigen::Index, Eigen::Index> pair,
                 const GridAxis& x_axis, const GridAxis& y_axis,
                 const std::optional<Vector>& conditioning_point) {
  const TStudentModel model(params);
  const auto d = model.dim();
  const auto [p, q] = pair;
  if (p == q || p < 0 || q < 0 || p >= d || q >= d) {
    raise(ErrorKind::InvalidArgument, "grid pair must be two distinct indices below " + std::to_string(d));
  }

  LdfGrid grid;
  grid.pair = pair;
  grid.x_values = x_axis.values();
  grid.y_values = y_axis.values();
  grid.conditioning_point = conditioning_point.value_or(Vector::Zero(d));
  if (grid.conditioning_point.size() != d) {
    raise(ErrorKind::DimensionMismatch, "conditioning point dimension");
  }

  const auto nx = static_cast<Eigen::Index>(grid.x_values.size());
  const auto ny = static_cast<Eigen::Index>(grid.y_values.size());
  grid.values.resize(nx, ny);
  Vector pt = grid.conditioning_point;
  for (Eigen::Index i = 0; i < nx; ++i) {
    pt(p) = grid.x_values[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < ny; ++j) {
      pt(q) = grid.y_values[static_cast<std::size_t>(j)];
      grid.values(i, j) = model.ldf_exact(pt)(p, q);
    }
  }
  return grid;
}

void write_ldf_grid_csv(std::ostream& out, const LdfGrid& grid) {
  out << "x,y,gamma\n";
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
      out << format_double(grid.x_values[static_cast<std::size_t>(i)]) << ','
          << format_double(grid.y_values[static_cast<std::size_t>(j)]) << ','
          << format_double(grid.values(i, j)) << '\n';
    }
  }
}

}  // namespace tgpm::ldf
