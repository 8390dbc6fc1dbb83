#include "tgpm/gpm.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tgpm/errors.hpp"
#include "tgpm/text.hpp"

namespace tgpm::gpm {

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::InverseCovariance: return "InverseCovariance";
    case EstimatorKind::Signed: return "Signed";
    case EstimatorKind::Abs: return "Abs";
    case EstimatorKind::Region: return "Region";
    case EstimatorKind::Taylor: return "Taylor";
  }
  return "Unknown";
}

std::string_view short_name(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::InverseCovariance: return "inv";
    case EstimatorKind::Signed: return "signed";
    case EstimatorKind::Abs: return "abs";
    case EstimatorKind::Region: return "region";
    case EstimatorKind::Taylor: return "taylor";
  }
  return "unknown";
}

std::optional<EstimatorKind> parse_kind(std::string_view name) noexcept {
  for (auto kind : {EstimatorKind::InverseCovariance, EstimatorKind::Signed, EstimatorKind::Abs,
                    EstimatorKind::Region, EstimatorKind::Taylor}) {
    if (name == short_name(kind) || name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

namespace {

// Window rows centered at the model location, with the precision matrix.
struct Centered {
  Matrix rows;
  Matrix precision;
  double nu;
  double scale;  // (nu + d) / nu
};

Centered center_window(const Matrix& window, const TStudentParams& params) {
  params.validate();
  if (window.cols() != params.dim()) {
    raise(ErrorKind::DimensionMismatch, "window has " + std::to_string(window.cols()) +
                                            " columns, model is " +
                                            std::to_string(params.dim()) + "-dimensional");
  }
  if (window.rows() < 1) raise(ErrorKind::InsufficientData, "empty window");
  const double d = static_cast<double>(params.dim());
  return Centered{window.rowwise() - params.mu.transpose(),
                  numerics::invert_spd(params.sigma).matrix(), params.nu, (params.nu + d) / params.nu};
}

// Negated LDF at one centered observation:
//   (nu+d)/nu [ P / (1+u) - 2 P x x^T P / (nu (1+u)^2) ],  u = x^T P x / nu.
void negated_ldf_term(const Centered& c, Eigen::Index i, Matrix& out) {
  const Vector x = c.rows.row(i).transpose();
  const Vector z = c.precision * x;
  const double a = 1.0 / (1.0 + z.dot(x) / c.nu);
  out.noalias() = (c.scale * a) * c.precision;
  out.noalias() -= (c.scale * 2.0 * a * a / c.nu) * (z * z.transpose());
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

struct PlugIn {
  TStudentParams params;
  std::size_t n;
};

PlugIn plug_in(const Matrix& window, double nu, const EstimatorOptions& options) {
  const auto n = window.rows();
  const auto d = window.cols();
  if (n < d + 1) {
    raise(ErrorKind::InsufficientData, "window of " + std::to_string(n) + " rows for " +
                                           std::to_string(d) + " assets (need n >= d + 1)");
  }
  if (!(nu > 0.0)) raise(ErrorKind::InvalidArgument, "nu must be positive, got " + format_double(nu));
  const auto moments = numerics::sample_moments(window, options.demean);
  Matrix sigma = moments.covariance.matrix();
  if (options.scatter_rescale) {
    if (!(nu > 2.0)) {
      raise(ErrorKind::InvalidArgument, "scatter rescaling needs nu > 2, got " + format_double(nu));
    }
    sigma *= (nu - 2.0) / nu;
  }
  Vector center = options.demean ? moments.mean : Vector::Zero(d);
  return PlugIn{TStudentParams{std::move(center), SpdMatrix(sigma), nu}, moments.n};
}

}  // namespace

Matrix standardize(const Matrix& values, const MomentSummary& moments) {
  if (values.cols() != moments.covariance.dim() || moments.mean.size() != values.cols()) {
    raise(ErrorKind::DimensionMismatch, "standardize: moments do not match the panel width");
  }
  const Matrix root = numerics::inv_sqrt_spd(moments.covariance).matrix();
  return (values.rowwise() - moments.mean.transpose()) * root;
}

GpmEstimate gpm_gaussian(const MomentSummary& moments) {
  GpmEstimate out;
  out.kind = EstimatorKind::InverseCovariance;
  out.matrix = numerics::invert_spd(moments.covariance).matrix();
  out.n = moments.n;
  return out;
}

GpmEstimate estimate_gpm(const Matrix& window, const TStudentParams& params) {
  const Centered c = center_window(window, params);
  const auto d = params.dim();
  Matrix sum = Matrix::Zero(d, d);
  Matrix term(d, d);
  for (Eigen::Index i = 0; i < c.rows.rows(); ++i) {
    negated_ldf_term(c, i, term);
    sum += term;
  }
  GpmEstimate out;
  out.kind = EstimatorKind::Signed;
  out.matrix = symmetrized(sum / static_cast<double>(c.rows.rows()));
  out.nu = params.nu;
  out.n = static_cast<std::size_t>(c.rows.rows());
  return out;
}

GpmEstimate estimate_gpm_abs(const Matrix& window, const TStudentParams& params) {
  const Centered c = center_window(window, params);
  const auto d = params.dim();
  Matrix sum = Matrix::Zero(d, d);
  Matrix term(d, d);
  for (Eigen::Index i = 0; i < c.rows.rows(); ++i) {
    negated_ldf_term(c, i, term);
    sum += term.cwiseAbs();
  }
  GpmEstimate out;
  out.kind = EstimatorKind::Abs;
  out.matrix = symmetrized(sum / static_cast<double>(c.rows.rows()));
  out.nu = params.nu;
  out.n = static_cast<std::size_t>(c.rows.rows());
  return out;
}

GpmEstimate estimate_gpm_region(const Matrix& window, const TStudentParams& params,
                                double threshold, VariablePair pair, RegionSide side) {
  const Centered c = center_window(window, params);
  const auto d = params.dim();
  const auto [p, q] = pair;
  if (p == q || p < 0 || q < 0 || p >= d || q >= d) {
    raise(ErrorKind::InvalidArgument, "region pair must be two distinct indices below " + std::to_string(d));
  }
  if (!(threshold >= 0.0)) {
    raise(ErrorKind::InvalidArgument, "region threshold must be >= 0, got " + format_double(threshold));
  }

  Matrix sum = Matrix::Zero(d, d);
  Matrix term(d, d);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < c.rows.rows(); ++i) {
    const double xp = c.rows(i, p);
    const double xq = c.rows(i, q);
    const bool in_tail = xp * xp + xq * xq >= threshold;
    if (in_tail != (side == RegionSide::Inside)) continue;
    negated_ldf_term(c, i, term);
    sum += term;
    ++hits;
  }

  GpmEstimate out;
  out.kind = EstimatorKind::Region;
  out.matrix = symmetrized(sum / static_cast<double>(c.rows.rows()));
  out.nu = params.nu;
  out.n = static_cast<std::size_t>(c.rows.rows());
  out.region_threshold = threshold;
  out.pair = pair;
  out.side = side;
  out.empty_region = hits == 0;
  return out;
}

GpmEstimate estimate_gpm_taylor(const Matrix& window, const TStudentParams& params) {
  const Centered c = center_window(window, params);
  const auto d = params.dim();
  const double nu = params.nu;
  const double n = static_cast<double>(c.rows.rows());
  const Matrix& prec = c.precision;
  const Matrix root = numerics::inv_sqrt_spd(params.sigma).matrix();

  const Matrix y = c.rows * root;
  const Vector delta = y.rowwise().squaredNorm();
  const double m1 = delta.mean();
  const double m2 = delta.squaredNorm() / n;
  const Matrix second = (c.rows.transpose() * c.rows) / n;
  const Matrix fourth = numerics::fourth_moment_matrix(y);

  const Matrix bracket = (1.0 / nu) * (1.0 - m1 / nu + m2 / (nu * nu)) * prec -
                         (2.0 / (nu * nu)) * (prec * second * prec) +
                         (4.0 / (nu * nu * nu)) * (root * fourth * root);
  GpmEstimate out;
  out.kind = EstimatorKind::Taylor;
  out.matrix = symmetrized((nu + static_cast<double>(d)) * bracket);
  out.nu = nu;
  out.n = static_cast<std::size_t>(c.rows.rows());
  return out;
}

Matrix taylor_closed_form(const Matrix& precision, const Matrix& precision_sqrt,
                          const Matrix& kurtosis, double nu) {
  const auto d = precision.rows();
  if (precision.cols() != d || precision_sqrt.rows() != d || precision_sqrt.cols() != d ||
      kurtosis.rows() != d || kurtosis.cols() != d) {
    raise(ErrorKind::DimensionMismatch, "taylor_closed_form: operand shapes differ");
  }
  const double dd = static_cast<double>(d);
  const Matrix shifted = kurtosis + (dd + 2.0) * Matrix::Identity(d, d);
  const double c = -1.0 + 2.0 / nu + dd / nu - shifted.trace() / (nu * nu);
  const Matrix out = -(nu + dd) * ((c / nu) * precision -
                                   (4.0 / (nu * nu * nu)) * (precision_sqrt * shifted * precision_sqrt));
  return symmetrized(out);
}

GpmEstimate estimate_gpm(const Matrix& window, double nu, const EstimatorOptions& options) {
  return estimate_gpm(window, plug_in(window, nu, options).params);
}

GpmEstimate estimate_gpm_abs(const Matrix& window, double nu, const EstimatorOptions& options) {
  return estimate_gpm_abs(window, plug_in(window, nu, options).params);
}

GpmEstimate estimate_gpm_region(const Matrix& window, double nu, double threshold, VariablePair pair,
                                RegionSide side, const EstimatorOptions& options) {
  return estimate_gpm_region(window, plug_in(window, nu, options).params, threshold, pair, side);
}

GpmEstimate estimate_gpm_taylor(const Matrix& window, double nu, const EstimatorOptions& options) {
  const PlugIn fit = plug_in(window, nu, options);
  const auto& sigma = fit.params.sigma;
  const Matrix prec = numerics::invert_spd(sigma).matrix();
  const Matrix root = numerics::inv_sqrt_spd(sigma).matrix();
  const Matrix y = (window.rowwise() - fit.params.mu.transpose()) * root;

  GpmEstimate out;
  out.kind = EstimatorKind::Taylor;
  out.matrix = taylor_closed_form(prec, root, numerics::mori_kurtosis(y), nu);
  out.nu = nu;
  out.n = fit.n;
  return out;
}

GpmEstimate estimate(const EstimatorSpec& spec, const Matrix& window) {
  switch (spec.kind) {
    case EstimatorKind::InverseCovariance: {
      const auto n = window.rows();
      if (n < window.cols() + 1) {
        raise(ErrorKind::InsufficientData, "window of " + std::to_string(n) + " rows for " +
                                               std::to_string(window.cols()) + " assets");
      }
      return gpm_gaussian(numerics::sample_moments(window, spec.options.demean));
    }
    case EstimatorKind::Signed: return estimate_gpm(window, spec.nu, spec.options);
    case EstimatorKind::Abs: return estimate_gpm_abs(window, spec.nu, spec.options);
    case EstimatorKind::Region:
      if (!spec.region_threshold) {
        raise(ErrorKind::InvalidArgument, "region estimator needs a threshold");
      }
      return estimate_gpm_region(window, spec.nu, *spec.region_threshold, spec.pair,
                                 RegionSide::Inside, spec.options);
    case EstimatorKind::Taylor: return estimate_gpm_taylor(window, spec.nu, spec.options);
  }
  raise(ErrorKind::InvalidArgument, "unknown estimator kind");
}

}  // namespace tgpm::gpm
