#include <catch_amalgamated.hpp>

#include <random>

#include "support/oracles.hpp"
#include "tgpm/data.hpp"
#include "tgpm/errors.hpp"
#include "tgpm/portfolio.hpp"

using namespace tgpm;
using namespace tgpm::portfolio;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

WeightVector wv(std::initializer_list<double> w) {
  Vector v(static_cast<Eigen::Index>(w.size()));
  Eigen::Index i = 0;
  for (double x : w) v(i++) = x;
  return {v, 0};
}

Vector vec(std::initializer_list<double> w) { return wv(w).weights; }

data::ReturnsMatrix sim_panel(std::size_t t, Eigen::Index d, std::uint64_t seed, double scale = 0.01) {
  std::mt19937_64 rng(seed);
  Matrix s = oracle::random_spd(d, rng) * scale * scale;
  return data::simulate_t(t, {Vector::Zero(d), numerics::SpdMatrix(s), 6.0}, seed);
}

}  // namespace

TEST_CASE("minimum-variance weights match the KKT solution") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const Matrix s = oracle::random_spd(6, rng);
    const Matrix p = oracle::gauss_jordan_inverse(s);
    const auto w = mv_weights(p, 3);
    CHECK((w.weights - oracle::min_variance_qp(s)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THAT(w.weights.sum(), WithinAbs(1.0, 1e-12));
    CHECK(w.window_index == 3);
    const auto scaled = mv_weights(37.5 * p);
    CHECK((scaled.weights - w.weights).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("degenerate denominator is reported with the window") {
  Matrix p(2, 2);
  p << 1, -1, -1, 1;
  try {
    mv_weights(p, 17);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateDenominator);
    CHECK(std::string(e.what()).find("17") != std::string::npos);
  }
}

TEST_CASE("hand-computed metrics") {
  const std::vector<WeightVector> w{wv({0.5, 0.5}), wv({0.5, 0.5})};
  const std::vector<Vector> r{vec({0.02, 0.04}), vec({0.0, 0.02})};
  const auto m = compute_metrics(w, r, 12.0);
  CHECK_THAT(m.mean, WithinAbs(0.02, 1e-15));
  CHECK_THAT(m.variance, WithinAbs(0.0002, 1e-15));
  CHECK(m.turnover == 0.0);
  CHECK_THAT(m.sharpe, WithinAbs(0.02 / std::sqrt(0.0002), 1e-12));
  CHECK_THAT(m.annualized_mean, WithinAbs(0.24, 1e-14));
  CHECK_THAT(m.annualized_variance, WithinAbs(0.0024, 1e-15));
  CHECK_THAT(m.annualized_sharpe, WithinRel(m.sharpe * std::sqrt(12.0), 1e-12));
  CHECK(m.var95 == 0.01);

  const std::vector<WeightVector> flip{wv({1, 0}), wv({0, 1})};
  CHECK_THAT(compute_metrics(flip, r, 1.0).turnover, WithinAbs(2.0 / 2.0, 1e-15));
  CHECK_THROWS_AS(compute_metrics({wv({1.0})}, {vec({0.1})}, 1.0), Error);
}

TEST_CASE("variance and VaR match sort and two-pass oracles") {
  std::mt19937_64 rng(4);
  std::student_t_distribution<double> t(4.0);
  std::vector<WeightVector> w;
  std::vector<Vector> r;
  std::vector<double> pr;
  for (int i = 0; i < 1000; ++i) {
    w.push_back(wv({0.3, 0.7}));
    r.push_back(vec({0.01 * t(rng), 0.01 * t(rng) + 0.001}));
    pr.push_back(0.3 * r.back()(0) + 0.7 * r.back()(1));
  }
  const auto m = compute_metrics(w, r, 252.0 / 21.0);
  CHECK_THAT(m.variance, WithinRel(oracle::two_pass_variance(pr), 1e-12));
  CHECK(m.var95 == oracle::sort_quantile(pr, 0.05));
  CHECK(m.var95 < 0.0);
}

TEST_CASE("wealth curve compounds and flags bankruptcy") {
  const std::vector<double> r{0.1, -0.5, 0.2};
  const auto w = wealth_curve(r, 2.0);
  REQUIRE(w.values.size() == 4);
  CHECK_THAT(w.values[3], WithinAbs(2.0 * 1.1 * 0.5 * 1.2, 1e-15));
  CHECK_FALSE(w.bankrupt_at);
  const auto b = wealth_curve(std::vector<double>{0.1, -1.2, 0.5}, 1.0);
  CHECK(b.bankrupt_at == 1u);
  CHECK(b.values[2] == 0.0);
  CHECK(b.values[3] == 0.0);
  CHECK_THROWS_AS(wealth_curve(r, 0.0), Error);
}

TEST_CASE("stability series and kind mismatch") {
  gpm::GpmEstimate a, b, c;
  a.matrix = Matrix::Identity(2, 2);
  b.matrix = 2 * Matrix::Identity(2, 2);
  c.matrix = Matrix::Zero(2, 2);
  c.kind = gpm::EstimatorKind::Abs;
  const auto s = stability_series({a, b});
  REQUIRE(s.size() == 1);
  CHECK_THAT(s[0], WithinAbs(std::sqrt(2.0), 1e-15));
  CHECK_THROWS_AS(stability_series({a, c}), Error);
  CHECK_THROWS_AS(stability_series({a}), Error);
}

TEST_CASE("window count and holding-period aggregation") {
  CHECK(count_windows(25100, 250, 21) == 1183);
  CHECK(count_windows(271, 250, 21) == 1);
  CHECK(count_windows(270, 250, 21) == 0);
  Matrix v(3, 2);
  v << 0.1, 0.0, 0.2, -0.5, -0.1, 0.5;
  const Vector c = holding_period_returns(v, 0, 3, Aggregation::Compound);
  CHECK_THAT(c(0), WithinAbs(1.1 * 1.2 * 0.9 - 1, 1e-15));
  CHECK_THAT(c(1), WithinAbs(0.5 * 1.5 - 1, 1e-15));
  const Vector s = holding_period_returns(v, 1, 2, Aggregation::SimpleSum);
  CHECK_THAT(s(0), WithinAbs(0.1, 1e-15));
}

TEST_CASE("backtest accounting and labels") {
  const auto panel = sim_panel(600, 4, 3);
  BacktestConfig cfg;
  cfg.window_size = 100;
  cfg.rebalance_period = 20;
  cfg.nu_list = {4.0, 6.5};
  cfg.bootstrap_reps = 999;
  cfg.seed = 5;
  const auto rep = rolling_backtest(panel, cfg);
  CHECK(rep.windows == 25);
  REQUIRE(rep.runs.size() == 7);
  CHECK(rep.runs[0].label == "inv");
  CHECK(rep.find("signed_nu6.5"));
  CHECK(rep.find("taylor_nu4"));
  for (const auto& run : rep.runs) {
    CHECK(run.returns.size() == 25);
    CHECK(run.stability.size() == 24);
    for (const auto& w : run.weights) CHECK_THAT(w.weights.sum(), WithinAbs(1.0, 1e-10));
    REQUIRE(run.metrics);
    CHECK(run.metrics->periods == 25);
    if (run.label != "inv") CHECK(run.test_vs_inverse);
  }

  // Window 3 holds over rows [160, 180).
  const auto& inv = *rep.find("inv");
  const Vector held = holding_period_returns(panel.values, 160, 20, Aggregation::Compound);
  CHECK_THAT(inv.returns[3], WithinAbs(inv.weights[3].weights.dot(held), 1e-15));
}

TEST_CASE("no look-ahead: rows after a window never change its weights") {
  auto panel = sim_panel(400, 3, 9);
  BacktestConfig cfg;
  cfg.window_size = 100;
  cfg.rebalance_period = 25;
  cfg.run_variance_tests = false;
  const auto base = rolling_backtest(panel, cfg);
  auto perturbed = panel;
  const Eigen::Index cut = 100 + 5 * 25;  // end of window 5
  perturbed.values.bottomRows(perturbed.rows() - cut).array() *= -3.0;
  const auto other = rolling_backtest(perturbed, cfg);
  for (std::size_t r = 0; r < base.runs.size(); ++r) {
    for (std::size_t k = 0; k <= 5; ++k) {
      CHECK((base.runs[r].weights[k].weights.array() == other.runs[r].weights[k].weights.array()).all());
    }
  }
}

TEST_CASE("fallback policies") {
  auto panel = sim_panel(300, 3, 2);
  // Make window 1 (rows 50..149 with ws 100, tau 50) singular: a duplicated column.
  panel.values.block(50, 2, 100, 1) = panel.values.block(50, 1, 100, 1);
  BacktestConfig cfg;
  cfg.window_size = 100;
  cfg.rebalance_period = 50;
  cfg.estimators = {gpm::EstimatorKind::InverseCovariance};
  cfg.run_variance_tests = false;

  cfg.fallback = FallbackPolicy::HoldPrevious;
  const auto hold = rolling_backtest(panel, cfg);
  REQUIRE(hold.runs[0].returns.size() == 4);
  CHECK(hold.runs[0].fallback_count >= 1);
  CHECK(hold.runs[0].weights[1].weights == hold.runs[0].weights[0].weights);

  cfg.fallback = FallbackPolicy::SkipWindow;
  const auto skip = rolling_backtest(panel, cfg);
  CHECK(skip.runs[0].returns.size() < 4);
  for (const auto& w : skip.runs[0].weights) CHECK(w.window_index != 1);

  cfg.fallback = FallbackPolicy::Fail;
  try {
    rolling_backtest(panel, cfg);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("window 1") != std::string::npos);
  }
}

TEST_CASE("short panels: single window and too few rows") {
  const auto panel = sim_panel(120, 2, 1);
  BacktestConfig cfg;
  cfg.window_size = 100;
  cfg.rebalance_period = 20;
  const auto rep = rolling_backtest(panel, cfg);
  CHECK(rep.windows == 1);
  for (const auto& run : rep.runs) {
    CHECK_FALSE(run.metrics);
    CHECK_FALSE(run.test_vs_inverse);
  }
  const auto& signed_run = *rep.find("signed_nu6");
  bool noted = false;
  for (const auto& n : signed_run.notices) noted |= n.find("variance test skipped") != std::string::npos;
  CHECK(noted);

  cfg.window_size = 110;
  CHECK_THROWS_AS(rolling_backtest(panel, cfg), Error);
}

TEST_CASE("config validation") {
  BacktestConfig cfg;
  cfg.estimators = {gpm::EstimatorKind::Region};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.region_threshold = 1.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.rebalance_period = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  BacktestConfig a;
  CHECK(a.annualization() == 12.0);
}
