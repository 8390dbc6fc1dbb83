#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>

#include "tgpm/ldf.hpp"
#include "tgpm/numerics.hpp"

namespace tgpm::gpm {

using ldf::TStudentParams;
using numerics::MomentSummary;
using numerics::SpdMatrix;

enum class EstimatorKind { InverseCovariance, Signed, Abs, Region, Taylor };

std::string_view to_string(EstimatorKind kind) noexcept;
/// Short CLI token: inv, signed, abs, region, taylor.
std::string_view short_name(EstimatorKind kind) noexcept;
/// Accepts either the short token or the full kind name.
std::optional<EstimatorKind> parse_kind(std::string_view name) noexcept;

using VariablePair = std::pair<Eigen::Index, Eigen::Index>;

enum class RegionSide { Inside, Outside };

struct GpmEstimate {
  Matrix matrix;
  EstimatorKind kind = EstimatorKind::Signed;
  std::optional<double> nu;  // absent for InverseCovariance
  std::size_t n = 0;
  std::optional<double> region_threshold;
  std::optional<VariablePair> pair;
  RegionSide side = RegionSide::Inside;
  // Region kind only: no observation fell on the requested side, matrix is zero.
  bool empty_region = false;
};

struct EstimatorOptions {
  // Center each window at its sample mean before forming the LDF terms.
  bool demean = true;
  // Plug in (nu - 2) / nu times the sample covariance as the t scatter matrix.
  bool scatter_rescale = false;
};

/// Rows y_i = Sigma^{-1/2} (x_i - mean) using the moments' covariance.
Matrix standardize(const Matrix& values, const MomentSummary& moments);

GpmEstimate gpm_gaussian(const MomentSummary& moments);

// Plug-in estimators. Each window is summarized by its sample moments and
// the result is fed through the supplied-parameter form below.
GpmEstimate estimate_gpm(const Matrix& window, double nu, const EstimatorOptions& options = {});
GpmEstimate estimate_gpm_abs(const Matrix& window, double nu, const EstimatorOptions& options = {});
GpmEstimate estimate_gpm_region(const Matrix& window, double nu, double threshold, VariablePair pair,
                                RegionSide side = RegionSide::Inside,
                                const EstimatorOptions& options = {});
GpmEstimate estimate_gpm_taylor(const Matrix& window, double nu,
                                const EstimatorOptions& options = {});

// Supplied-parameter forms: the LDF terms are evaluated with the given
// location and scatter instead of window estimates.
GpmEstimate estimate_gpm(const Matrix& window, const TStudentParams& params);
GpmEstimate estimate_gpm_abs(const Matrix& window, const TStudentParams& params);
GpmEstimate estimate_gpm_region(const Matrix& window, const TStudentParams& params,
                                double threshold, VariablePair pair,
                                RegionSide side = RegionSide::Inside);
/// Window average of the third-order LDF expansion, assembled from moments:
///   (nu+d) [ nu^-1 (1 - m1/nu + m2/nu^2) P - 2 nu^-2 P S P + 4 nu^-3 R F R ]
/// with P = Sigma^-1, R = Sigma^-1/2, S the second moment about mu, m1, m2
/// the mean of delta and delta^2, and F = K(Y) + (d+2) I. When Sigma is the
/// 1/n covariance of the window this equals taylor_closed_form().
GpmEstimate estimate_gpm_taylor(const Matrix& window, const TStudentParams& params);

/// Closed-form Taylor GPM for a covariance plug-in:
///   -(nu+d) [ nu^-1 c P - 4 nu^-3 R (K + (d+2) I) R ],
///   c = -1 + 2/nu + d/nu - tr(K + (d+2) I) / nu^2.
Matrix taylor_closed_form(const Matrix& precision, const Matrix& precision_sqrt,
                          const Matrix& kurtosis, double nu);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Signed;
  double nu = 6.0;
  std::optional<double> region_threshold;
  VariablePair pair{0, 1};
  EstimatorOptions options;
};

/// Dispatches on spec.kind. The nu of an InverseCovariance spec is ignored.
GpmEstimate estimate(const EstimatorSpec& spec, const Matrix& window);

}  // namespace tgpm::gpm
