#include "tgpm/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>

#include "tgpm/errors.hpp"
#include "tgpm/text.hpp"

namespace tgpm::portfolio {

WeightVector mv_weights(const Matrix& precision, std::size_t window_index) {
  if (precision.rows() != precision.cols() || precision.rows() == 0) {
    raise(ErrorKind::DimensionMismatch, "mv_weights needs a non-empty square matrix");
  }
  const Vector row_sums = precision.rowwise().sum();
  const double denom = row_sums.sum();
  const double scale = precision.cwiseAbs().sum();
  if (!std::isfinite(denom) || !(std::abs(denom) > 1e-12 * scale)) {
    raise(ErrorKind::DegenerateDenominator,
          "1'P1 = " + format_double(denom) + " is degenerate for window " + std::to_string(window_index));
  }
  Vector w = row_sums / denom;
  w /= w.sum();
  if (!w.allFinite()) {
    raise(ErrorKind::DegenerateDenominator, "non-finite weights for window " + std::to_string(window_index));
  }
  return WeightVector{std::move(w), window_index};
}

std::vector<double> portfolio_returns(const std::vector<WeightVector>& weights,
                                      const std::vector<Vector>& period_returns) {
  if (weights.size() != period_returns.size()) {
    raise(ErrorKind::DimensionMismatch, "weights and period returns are not aligned");
  }
  std::vector<double> out(weights.size());
  for (std::size_t t = 0; t < weights.size(); ++t) {
    if (weights[t].weights.size() != period_returns[t].size()) {
      raise(ErrorKind::DimensionMismatch, "weight and return vectors differ in length at period " +
                                              std::to_string(t));
    }
    out[t] = weights[t].weights.dot(period_returns[t]);
  }
  return out;
}

double empirical_quantile(std::span<const double> values, double level) {
  if (values.empty()) raise(ErrorKind::InsufficientData, "quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(level * m));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

Metrics compute_metrics(const std::vector<WeightVector>& weights,
                        const std::vector<Vector>& period_returns, double annualization_factor) {
  const auto rets = portfolio_returns(weights, period_returns);
  const std::size_t m = rets.size();
  if (m < 2) raise(ErrorKind::InsufficientData, "metrics need at least 2 periods, got " + std::to_string(m));

  Metrics out;
  out.periods = m;
  double sum = 0.0;
  for (double r : rets) sum += r;
  out.mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (double r : rets) ss += (r - out.mean) * (r - out.mean);
  out.variance = ss / static_cast<double>(m - 1);
  const double sd = std::sqrt(out.variance);
  out.sharpe = sd > 0.0 ? out.mean / sd : std::numeric_limits<double>::quiet_NaN();

  double turnover = 0.0;
  for (std::size_t t = 1; t < m; ++t) {
    turnover += (weights[t - 1].weights - weights[t].weights).cwiseAbs().sum();
  }
  out.turnover = turnover / static_cast<double>(m);
  out.var95 = empirical_quantile(rets, 0.05);

  out.annualized_mean = annualization_factor * out.mean;
  out.annualized_variance = annualization_factor * out.variance;
  out.annualized_sharpe = out.annualized_variance > 0.0
                              ? out.annualized_mean / std::sqrt(out.annualized_variance)
                              : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::string significance_stars(double p_value) {
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  if (p_value < 0.10) return "*";
  return "";
}

WealthCurve wealth_curve(std::span<const double> returns, double initial) {
  if (!(initial > 0.0)) raise(ErrorKind::InvalidArgument, "initial wealth must be positive");
  WealthCurve out;
  out.values.reserve(returns.size() + 1);
  out.values.push_back(initial);
  double w = initial;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    if (!out.bankrupt_at && returns[t] <= -1.0) out.bankrupt_at = t;
    w = out.bankrupt_at ? 0.0 : w * (1.0 + returns[t]);
    out.values.push_back(w);
  }
  return out;
}

std::vector<double> stability_series(const std::vector<gpm::GpmEstimate>& estimates) {
  if (estimates.size() < 2) raise(ErrorKind::InsufficientData, "stability needs at least 2 estimates");
  std::vector<double> out;
  out.reserve(estimates.size() - 1);
  for (std::size_t k = 1; k < estimates.size(); ++k) {
    if (estimates[k].kind != estimates[k - 1].kind) {
      raise(ErrorKind::KindMismatch, "estimate " + std::to_string(k) + " is " +
                                         std::string(gpm::to_string(estimates[k].kind)) + ", previous is " +
                                         std::string(gpm::to_string(estimates[k - 1].kind)));
    }
    out.push_back(numerics::frobenius_distance(estimates[k - 1].matrix, estimates[k].matrix));
  }
  return out;
}

std::string_view to_string(FallbackPolicy policy) noexcept {
  switch (policy) {
    case FallbackPolicy::SkipWindow: return "skip-window";
    case FallbackPolicy::HoldPrevious: return "hold-previous";
    case FallbackPolicy::Fail: return "fail";
  }
  return "unknown";
}

std::string_view to_string(Aggregation aggregation) noexcept {
  switch (aggregation) {
    case Aggregation::Compound: return "compound";
    case Aggregation::SimpleSum: return "simple-sum";
  }
  return "unknown";
}

void BacktestConfig::validate() const {
  if (window_size < 2) raise(ErrorKind::InvalidArgument, "window size must be at least 2");
  if (rebalance_period < 1) raise(ErrorKind::InvalidArgument, "rebalance period must be at least 1");
  if (estimators.empty()) raise(ErrorKind::InvalidArgument, "no estimators selected");
  for (double nu : nu_list) {
    if (!(nu > 0.0) || !std::isfinite(nu)) {
      raise(ErrorKind::InvalidArgument, "nu must be positive, got " + format_double(nu));
    }
  }
  const bool needs_nu = std::any_of(estimators.begin(), estimators.end(), [](auto k) {
    return k != gpm::EstimatorKind::InverseCovariance;
  });
  if (needs_nu && nu_list.empty()) raise(ErrorKind::InvalidArgument, "nu list is empty");
  const bool has_region = std::find(estimators.begin(), estimators.end(), gpm::EstimatorKind::Region) !=
                          estimators.end();
  if (has_region && !region_threshold) {
    raise(ErrorKind::InvalidArgument, "region estimator selected without a threshold");
  }
  if (annualization_factor && !(*annualization_factor > 0.0)) {
    raise(ErrorKind::InvalidArgument, "annualization factor must be positive");
  }
  if (run_variance_tests && bootstrap_reps < 999) {
    raise(ErrorKind::InvalidArgument, "variance test needs at least 999 bootstrap replications");
  }
}

double BacktestConfig::annualization() const {
  return annualization_factor.value_or(252.0 / static_cast<double>(rebalance_period));
}

std::size_t count_windows(std::size_t observations, std::size_t window_size, std::size_t rebalance_period) {
  if (observations < window_size + rebalance_period) return 0;
  return (observations - window_size) / rebalance_period;
}

Vector holding_period_returns(const Matrix& values, Eigen::Index start, Eigen::Index length,
                              Aggregation aggregation) {
  const auto block = values.middleRows(start, length);
  if (aggregation == Aggregation::SimpleSum) return block.colwise().sum().transpose();
  return ((1.0 + block.array()).colwise().prod() - 1.0).matrix().transpose();
}

const EstimatorRun* BacktestReport::find(std::string_view label) const {
  for (const auto& run : runs) {
    if (run.label == label) return &run;
  }
  return nullptr;
}

std::string run_label(const gpm::EstimatorSpec& spec) {
  std::string label(gpm::short_name(spec.kind));
  if (spec.kind != gpm::EstimatorKind::InverseCovariance) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_nu%g", spec.nu);
    label += buf;
  }
  return label;
}

namespace {

std::vector<gpm::EstimatorSpec> expand_specs(const BacktestConfig& config) {
  std::vector<gpm::EstimatorSpec> specs;
  for (auto kind : config.estimators) {
    if (kind == gpm::EstimatorKind::InverseCovariance) {
      gpm::EstimatorSpec spec;
      spec.kind = kind;
      spec.nu = 0.0;
      spec.options = config.estimator_options;
      specs.push_back(spec);
    }
  }
  for (double nu : config.nu_list) {
    for (auto kind : config.estimators) {
      if (kind == gpm::EstimatorKind::InverseCovariance) continue;
      gpm::EstimatorSpec spec;
      spec.kind = kind;
      spec.nu = nu;
      spec.region_threshold = config.region_threshold;
      spec.pair = config.region_pair;
      spec.options = config.estimator_options;
      specs.push_back(spec);
    }
  }
  return specs;
}

struct RunState {
  std::optional<Matrix> previous_estimate;
  std::optional<Vector> previous_weights;
};

}  // namespace

BacktestReport rolling_backtest(const data::ReturnsMatrix& returns, const BacktestConfig& config) {
  config.validate();
  returns.validate();
  const auto t_obs = static_cast<std::size_t>(returns.rows());
  const std::size_t ws = config.window_size;
  const std::size_t tau = config.rebalance_period;
  if (t_obs < ws + tau) {
    raise(ErrorKind::InsufficientData, "panel has " + std::to_string(t_obs) + " rows, need ws + tau = " +
                                           std::to_string(ws + tau));
  }

  BacktestReport report;
  report.config = config;
  report.observations = t_obs;
  report.assets = returns.assets;
  report.windows = count_windows(t_obs, ws, tau);
  const auto n_assets = returns.cols();
  if (ws <= static_cast<std::size_t>(n_assets)) {
    report.notices.push_back("window size " + std::to_string(ws) + " does not exceed the " +
                             std::to_string(n_assets) + " assets; estimation will fail");
  }

  const auto specs = expand_specs(config);
  report.runs.resize(specs.size());
  std::vector<RunState> state(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    report.runs[s].spec = specs[s];
    report.runs[s].label = run_label(specs[s]);
  }

  std::vector<Vector> period_returns(report.windows);
  for (std::size_t k = 0; k < report.windows; ++k) {
    const auto start = static_cast<Eigen::Index>(k * tau);
    const Matrix window = returns.values.middleRows(start, static_cast<Eigen::Index>(ws));
    period_returns[k] = holding_period_returns(returns.values, start + static_cast<Eigen::Index>(ws),
                                               static_cast<Eigen::Index>(tau), config.aggregation);

    for (std::size_t s = 0; s < specs.size(); ++s) {
      EstimatorRun& run = report.runs[s];
      RunState& st = state[s];
      std::optional<WeightVector> weights;
      std::string failure;
      ErrorKind failure_kind = ErrorKind::InvalidArgument;
      try {
        const auto est = gpm::estimate(specs[s], window);
        if (st.previous_estimate) {
          run.stability.push_back(numerics::frobenius_distance(*st.previous_estimate, est.matrix));
          run.stability_windows.push_back(k);
        }
        st.previous_estimate = est.matrix;
        weights = mv_weights(est.matrix, k);
      } catch (const Error& e) {
        failure = e.what();
        failure_kind = e.kind();
      }

      if (!weights) {
        switch (config.fallback) {
          case FallbackPolicy::Fail:
            raise(failure_kind, run.label + " failed at window " + std::to_string(k) + ": " + failure);
          case FallbackPolicy::SkipWindow:
            ++run.fallback_count;
            run.notices.push_back("window " + std::to_string(k) + " skipped: " + failure);
            continue;
          case FallbackPolicy::HoldPrevious:
            ++run.fallback_count;
            run.notices.push_back("window " + std::to_string(k) + " held previous weights: " + failure);
            weights = WeightVector{st.previous_weights.value_or(
                                       Vector::Constant(n_assets, 1.0 / static_cast<double>(n_assets))),
                                   k};
            break;
        }
      }
      st.previous_weights = weights->weights;
      run.returns.push_back(weights->weights.dot(period_returns[k]));
      run.weights.push_back(std::move(*weights));
    }
  }

  const double factor = config.annualization();
  for (auto& run : report.runs) {
    run.wealth = wealth_curve(run.returns, config.initial_wealth);
    if (run.wealth.bankrupt_at) {
      run.notices.push_back("wealth exhausted in period " + std::to_string(*run.wealth.bankrupt_at));
    }
    if (run.weights.size() >= 2) {
      std::vector<Vector> aligned;
      aligned.reserve(run.weights.size());
      for (const auto& w : run.weights) aligned.push_back(period_returns[w.window_index]);
      run.metrics = compute_metrics(run.weights, aligned, factor);
    } else {
      run.notices.push_back("metrics need at least 2 periods, have " + std::to_string(run.weights.size()));
    }
  }

  if (!config.run_variance_tests) return report;
  const EstimatorRun* reference = nullptr;
  for (const auto& run : report.runs) {
    if (run.spec.kind == gpm::EstimatorKind::InverseCovariance) reference = &run;
  }
  if (!reference) {
    report.notices.push_back("variance tests skipped: inverse covariance not among the estimators");
    return report;
  }
  for (auto& run : report.runs) {
    if (&run == reference) continue;
    // Pair periods both runs realized.
    std::vector<double> a, b;
    std::size_t i = 0, j = 0;
    while (i < run.weights.size() && j < reference->weights.size()) {
      const auto wi = run.weights[i].window_index;
      const auto wj = reference->weights[j].window_index;
      if (wi == wj) {
        a.push_back(run.returns[i++]);
        b.push_back(reference->returns[j++]);
      } else if (wi < wj) {
        ++i;
      } else {
        ++j;
      }
    }
    if (a.size() < kMinTestPeriods) {
      run.notices.push_back("variance test skipped: " + std::to_string(a.size()) +
                            " paired periods (need " + std::to_string(kMinTestPeriods) + ")");
      continue;
    }
    try {
      run.test_vs_inverse = lw_variance_test(a, b, config.seed, config.bootstrap_reps, config.block_length);
    } catch (const Error& e) {
      run.notices.push_back(std::string("variance test failed: ") + e.what());
    }
  }
  return report;
}

}  // namespace tgpm::portfolio
