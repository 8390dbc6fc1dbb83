#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgpm/data.hpp"
#include "tgpm/gpm.hpp"
#include "tgpm/numerics.hpp"

namespace tgpm::portfolio {

struct WeightVector {
  Vector weights;
  std::size_t window_index = 0;
};

/// Minimum-variance weights P 1 / (1^T P 1) for any precision-like matrix P.
/// Raises DegenerateDenominator when 1^T P 1 is not clearly away from zero
/// (relative to the entry scale) or the weights are not finite.
WeightVector mv_weights(const Matrix& precision, std::size_t window_index = 0);

struct Metrics {
  std::size_t periods = 0;
  double mean = 0.0;
  double variance = 0.0;  // divisor M - 1
  double sharpe = 0.0;    // mean / sd, zero risk-free rate
  double turnover = 0.0;
  double var95 = 0.0;     // empirical 5th percentile, a (usually negative) return level
  double annualized_mean = 0.0;
  double annualized_variance = 0.0;
  double annualized_sharpe = 0.0;
};

std::vector<double> portfolio_returns(const std::vector<WeightVector>& weights,
                                      const std::vector<Vector>& period_returns);

/// Turnover counts no trade before the first portfolio.
Metrics compute_metrics(const std::vector<WeightVector>& weights,
                        const std::vector<Vector>& period_returns, double annualization_factor);

/// Type-1 empirical quantile: element ceil(level * M) (1-based) of the sorted sample.
double empirical_quantile(std::span<const double> values, double level);

struct VarianceTestResult {
  double statistic = 0.0;  // |log var_a - log var_b| / HAC standard error
  double log_variance_difference = 0.0;
  double p_value = 1.0;
  std::string method;
  std::size_t block_length = 1;
  std::size_t bootstrap_reps = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultBootstrapReps = 4999;
inline constexpr std::size_t kMinTestPeriods = 20;

std::size_t default_block_length(std::size_t periods);

/// Two-sided test of equal variances for paired return series via a
/// studentized circular block bootstrap on the log-variance difference.
VarianceTestResult lw_variance_test(std::span<const double> returns_a,
                                    std::span<const double> returns_b, std::uint64_t seed,
                                    std::size_t reps = kDefaultBootstrapReps,
                                    std::optional<std::size_t> block_length = std::nullopt);

/// "***", "**", "*" at the 1%, 5%, 10% levels, otherwise empty.
std::string significance_stars(double p_value);

struct WealthCurve {
  std::vector<double> values;  // M + 1 entries starting at the initial wealth
  // First period whose return is <= -1; wealth stays at zero afterwards.
  std::optional<std::size_t> bankrupt_at;
};

WealthCurve wealth_curve(std::span<const double> returns, double initial = 1.0);

/// Frobenius distances between consecutive estimates.
std::vector<double> stability_series(const std::vector<gpm::GpmEstimate>& estimates);

enum class FallbackPolicy { SkipWindow, HoldPrevious, Fail };
enum class Aggregation { Compound, SimpleSum };

std::string_view to_string(FallbackPolicy policy) noexcept;
std::string_view to_string(Aggregation aggregation) noexcept;

struct BacktestConfig {
  std::size_t window_size = 250;
  std::size_t rebalance_period = 21;
  std::vector<double> nu_list{6.0};
  std::vector<gpm::EstimatorKind> estimators{
      gpm::EstimatorKind::InverseCovariance, gpm::EstimatorKind::Signed,
      gpm::EstimatorKind::Abs, gpm::EstimatorKind::Taylor};
  std::optional<double> region_threshold;
  gpm::VariablePair region_pair{0, 1};
  gpm::EstimatorOptions estimator_options;
  // Defaults to 252 / rebalance_period when unset.
  std::optional<double> annualization_factor;
  FallbackPolicy fallback = FallbackPolicy::HoldPrevious;
  Aggregation aggregation = Aggregation::Compound;
  bool run_variance_tests = true;
  std::uint64_t seed = 0;
  std::size_t bootstrap_reps = kDefaultBootstrapReps;
  std::optional<std::size_t> block_length;
  double initial_wealth = 1.0;

  void validate() const;
  double annualization() const;
};

/// floor((T - ws) / tau); zero when T < ws + tau.
std::size_t count_windows(std::size_t observations, std::size_t window_size, std::size_t rebalance_period);

/// Per-asset return over rows [start, start + length).
Vector holding_period_returns(const Matrix& values, Eigen::Index start, Eigen::Index length,
                              Aggregation aggregation);

struct EstimatorRun {
  std::string label;
  gpm::EstimatorSpec spec;
  std::vector<WeightVector> weights;
  std::vector<double> returns;       // aligned with weights
  std::vector<double> stability;     // distance to the previous available estimate
  std::vector<std::size_t> stability_windows;
  WealthCurve wealth;
  std::optional<Metrics> metrics;
  std::optional<VarianceTestResult> test_vs_inverse;
  std::size_t fallback_count = 0;
  std::vector<std::string> notices;
};

struct BacktestReport {
  BacktestConfig config;
  std::size_t observations = 0;
  std::vector<std::string> assets;
  std::size_t windows = 0;  // M
  std::vector<EstimatorRun> runs;
  std::vector<std::string> notices;

  const EstimatorRun* find(std::string_view label) const;
};

std::string run_label(const gpm::EstimatorSpec& spec);

/// Rolls a window of `window_size` rows forward by `rebalance_period` rows.
/// Window k estimates on rows [k tau, k tau + ws) and is held over the next
/// tau rows. Estimation uses no row at or beyond k tau + ws.
BacktestReport rolling_backtest(const data::ReturnsMatrix& returns, const BacktestConfig& config);

}  // namespace tgpm::portfolio
