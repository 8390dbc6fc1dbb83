#include "tgpm/report_io.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "tgpm/errors.hpp"
#include "tgpm/text.hpp"

namespace tgpm::io {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// NaN has no JSON spelling; emit null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json metrics_json(const portfolio::Metrics& m) {
  return {{"periods", m.periods},
          {"mean", number(m.mean)},
          {"variance", number(m.variance)},
          {"sharpe", number(m.sharpe)},
          {"turnover", number(m.turnover)},
          {"var95", number(m.var95)},
          {"annualized_mean", number(m.annualized_mean)},
          {"annualized_variance", number(m.annualized_variance)},
          {"annualized_sharpe", number(m.annualized_sharpe)}};
}

json test_json(const portfolio::VarianceTestResult& t) {
  return {{"statistic", number(t.statistic)},
          {"log_variance_difference", number(t.log_variance_difference)},
          {"p_value", number(t.p_value)},
          {"stars", portfolio::significance_stars(t.p_value)},
          {"method", t.method},
          {"block_length", t.block_length},
          {"bootstrap_reps", t.bootstrap_reps},
          {"seed", t.seed}};
}

std::string kind_list(const std::vector<gpm::EstimatorKind>& kinds) {
  std::string out;
  for (auto k : kinds) {
    if (!out.empty()) out += ',';
    out += gpm::short_name(k);
  }
  return out;
}

}  // namespace

std::string gpm_estimate_to_json(const gpm::GpmEstimate& estimate, const std::vector<std::string>& assets) {
  json j;
  j["kind"] = std::string(gpm::short_name(estimate.kind));
  if (estimate.nu) j["nu"] = *estimate.nu;
  j["n"] = estimate.n;
  if (estimate.region_threshold) {
    j["region_threshold"] = *estimate.region_threshold;
    j["region_side"] = estimate.side == gpm::RegionSide::Inside ? "inside" : "outside";
    j["empty_region"] = estimate.empty_region;
  }
  if (estimate.pair) j["pair"] = {estimate.pair->first, estimate.pair->second};
  if (!assets.empty()) j["assets"] = assets;
  j["matrix"] = matrix_json(estimate.matrix);
  return j.dump(2) + "\n";
}

gpm::GpmEstimate gpm_estimate_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorKind::ParseError, std::string("estimate JSON: ") + e.what());
  }
  gpm::GpmEstimate out;
  try {
    const auto kind = gpm::parse_kind(j.at("kind").get<std::string>());
    if (!kind) raise(ErrorKind::ParseError, "unknown estimator kind " + j.at("kind").dump());
    out.kind = *kind;
    if (j.contains("nu")) out.nu = j["nu"].get<double>();
    out.n = j.at("n").get<std::size_t>();
    if (j.contains("region_threshold")) out.region_threshold = j["region_threshold"].get<double>();
    if (j.contains("region_side")) {
      out.side = j["region_side"].get<std::string>() == "outside" ? gpm::RegionSide::Outside
                                                                   : gpm::RegionSide::Inside;
    }
    if (j.contains("empty_region")) out.empty_region = j["empty_region"].get<bool>();
    if (j.contains("pair")) {
      out.pair = gpm::VariablePair{j["pair"].at(0).get<Eigen::Index>(), j["pair"].at(1).get<Eigen::Index>()};
    }
    const auto& rows = j.at("matrix");
    const auto d = static_cast<Eigen::Index>(rows.size());
    out.matrix.resize(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      if (static_cast<Eigen::Index>(row.size()) != d) {
        raise(ErrorKind::DimensionMismatch, "estimate matrix is not square");
      }
      for (Eigen::Index c = 0; c < d; ++c) out.matrix(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  } catch (const json::exception& e) {
    raise(ErrorKind::ParseError, std::string("estimate JSON: ") + e.what());
  }
  return out;
}

std::string backtest_report_json(const portfolio::BacktestReport& report) {
  const auto& c = report.config;
  json config = {{"window_size", c.window_size},
                 {"rebalance_period", c.rebalance_period},
                 {"nu", c.nu_list},
                 {"estimators", kind_list(c.estimators)},
                 {"annualization_factor", c.annualization()},
                 {"fallback", std::string(portfolio::to_string(c.fallback))},
                 {"aggregation", std::string(portfolio::to_string(c.aggregation))},
                 {"demean", c.estimator_options.demean},
                 {"scatter_rescale", c.estimator_options.scatter_rescale},
                 {"variance_tests", c.run_variance_tests},
                 {"seed", c.seed},
                 {"bootstrap_reps", c.bootstrap_reps},
                 {"initial_wealth", c.initial_wealth}};
  if (c.region_threshold) {
    config["region_threshold"] = *c.region_threshold;
    config["region_pair"] = {c.region_pair.first, c.region_pair.second};
  }
  if (c.block_length) config["block_length"] = *c.block_length;

  json runs = json::array();
  for (const auto& run : report.runs) {
    json r = {{"label", run.label},
              {"kind", std::string(gpm::short_name(run.spec.kind))},
              {"periods", run.returns.size()},
              {"fallback_count", run.fallback_count},
              {"notices", run.notices}};
    if (run.spec.kind != gpm::EstimatorKind::InverseCovariance) r["nu"] = run.spec.nu;
    r["metrics"] = run.metrics ? metrics_json(*run.metrics) : json(nullptr);
    r["test_vs_inverse"] = run.test_vs_inverse ? test_json(*run.test_vs_inverse) : json(nullptr);
    r["final_wealth"] = run.wealth.values.empty() ? json(nullptr) : number(run.wealth.values.back());
    r["bankrupt_at"] = run.wealth.bankrupt_at ? json(*run.wealth.bankrupt_at) : json(nullptr);
    double stab = 0.0;
    for (double s : run.stability) stab += s;
    r["mean_stability"] = run.stability.empty() ? json(nullptr) : number(stab / static_cast<double>(run.stability.size()));
    runs.push_back(std::move(r));
  }
  json j = {{"observations", report.observations},
            {"assets", report.assets},
            {"windows", report.windows},
            {"config", std::move(config)},
            {"runs", std::move(runs)},
            {"notices", report.notices}};
  return j.dump(2) + "\n";
}

std::vector<std::string> write_backtest_outputs(const portfolio::BacktestReport& report,
                                                const std::string& outdir) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& contents) {
    const auto path = (fs::path(outdir) / name).string();
    write_file_atomic(path, contents);
    written.push_back(path);
  };
  put("report.json", backtest_report_json(report));

  for (const auto& run : report.runs) {
    std::ostringstream rets, wealth, stab, weights;
    rets << "window,return\n";
    weights << "window";
    for (const auto& a : report.assets) weights << ',' << a;
    weights << '\n';
    for (std::size_t i = 0; i < run.returns.size(); ++i) {
      const auto k = run.weights[i].window_index;
      rets << k << ',' << format_double(run.returns[i]) << '\n';
      weights << k;
      for (Eigen::Index a = 0; a < run.weights[i].weights.size(); ++a) {
        weights << ',' << format_double(run.weights[i].weights(a));
      }
      weights << '\n';
    }
    wealth << "period,wealth\n";
    for (std::size_t t = 0; t < run.wealth.values.size(); ++t) {
      wealth << t << ',' << format_double(run.wealth.values[t]) << '\n';
    }
    stab << "window,frobenius_distance\n";
    for (std::size_t i = 0; i < run.stability.size(); ++i) {
      stab << run.stability_windows[i] << ',' << format_double(run.stability[i]) << '\n';
    }
    put("returns_" + run.label + ".csv", rets.str());
    put("wealth_" + run.label + ".csv", wealth.str());
    put("stability_" + run.label + ".csv", stab.str());
    put("weights_" + run.label + ".csv", weights.str());
  }
  return written;
}

}  // namespace tgpm::io
