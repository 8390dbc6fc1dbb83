// tgpm: estimation, backtesting, grid export and simulation from the shell.
// Exit codes: 0 success, 1 data or runtime error, 2 usage error.

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tgpm/data.hpp"
#include "tgpm/errors.hpp"
#include "tgpm/gpm.hpp"
#include "tgpm/ldf.hpp"
#include "tgpm/portfolio.hpp"
#include "tgpm/report_io.hpp"
#include "tgpm/text.hpp"

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) tgpm::raise(tgpm::ErrorKind::Io, "cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& output, const std::string& subcommand, json config,
                    const std::vector<std::string>& inputs, std::optional<std::uint64_t> seed,
                    const std::vector<std::string>& outputs) {
  json in = json::array();
  for (const auto& path : inputs) in.push_back({{"path", path}, {"sha256", sha256_file(path)}});
  json out = json::array();
  for (const auto& path : outputs) out.push_back({{"path", path}, {"sha256", sha256_file(path)}});
  json manifest = {{"subcommand", subcommand},
                   {"tool_version", TGPM_VERSION},
                   {"config", std::move(config)},
                   {"inputs", std::move(in)},
                   {"outputs", std::move(out)},
                   {"seed", seed ? json(*seed) : json(nullptr)},
                   {"timestamp", utc_timestamp()}};
  tgpm::write_file_atomic(output + ".manifest.json", manifest.dump(2) + "\n");
}

tgpm::data::ReturnsMatrix load_panel(const std::string& path, const std::string& format) {
  tgpm::data::LoadStats stats;
  tgpm::data::ReturnsMatrix out;
  if (format == "csv") {
    out = tgpm::data::load_returns_csv(path, "date", ',', &stats);
  } else if (format == "prices") {
    out = tgpm::data::log_returns(tgpm::data::load_price_csv(path, "date", ',', &stats));
  } else {
    out = tgpm::data::load_ff_industry(path, &stats);
  }
  if (stats.dropped_rows > 0) {
    std::cerr << "tgpm: dropped " << stats.dropped_rows << " row(s) with missing values from " << path
              << "\n";
  }
  return out;
}

tgpm::Matrix load_sigma_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) tgpm::raise(tgpm::ErrorKind::Io, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (tgpm::trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : tgpm::split(line, ',')) {
      const std::string s(tgpm::trim(cell));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() || s.empty()) {
        tgpm::raise(tgpm::ErrorKind::ParseError,
                    path + ":" + std::to_string(lineno) + ": not a number: '" + s + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  const auto d = static_cast<Eigen::Index>(rows.size());
  tgpm::Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != d) {
      tgpm::raise(tgpm::ErrorKind::DimensionMismatch, path + ": scatter matrix is not square");
    }
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

template <class T>
std::string joined(const std::vector<T>& xs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  return os.str();
}

struct EstimateArgs {
  std::string input, format = "csv", estimator = "signed", output;
  double nu = 6.0;
  std::optional<double> threshold;
  std::vector<Eigen::Index> pair{0, 1};
  bool demean = true, scatter_rescale = false;
};

int run_estimate(const EstimateArgs& a) {
  const auto kind = tgpm::gpm::parse_kind(a.estimator);
  if (!kind) throw UsageError("unknown estimator '" + a.estimator + "'");
  if (*kind == tgpm::gpm::EstimatorKind::Region && !a.threshold) {
    throw UsageError("--estimator region requires --region-threshold");
  }
  const auto panel = load_panel(a.input, a.format);
  tgpm::gpm::EstimatorSpec spec;
  spec.kind = *kind;
  spec.nu = a.nu;
  spec.region_threshold = a.threshold;
  spec.pair = {a.pair[0], a.pair[1]};
  spec.options.demean = a.demean;
  spec.options.scatter_rescale = a.scatter_rescale;
  const auto estimate = tgpm::gpm::estimate(spec, panel.values);
  tgpm::write_file_atomic(a.output, tgpm::io::gpm_estimate_to_json(estimate, panel.assets));

  json config = {{"input", a.input},       {"format", a.format},
                 {"estimator", a.estimator}, {"nu", a.nu},
                 {"pair", a.pair},          {"demean", a.demean},
                 {"scatter_rescale", a.scatter_rescale}, {"output", a.output}};
  if (a.threshold) config["region_threshold"] = *a.threshold;
  write_manifest(a.output, "estimate", config, {a.input}, std::nullopt, {a.output});
  return 0;
}

struct BacktestArgs {
  std::string input, format = "csv", estimators = "inv,signed,abs,taylor", outdir;
  std::size_t ws = 250, tau = 21;
  std::vector<double> nu;
  std::optional<double> annualization, threshold;
  std::vector<Eigen::Index> pair{0, 1};
  std::uint64_t seed = 0;
  std::size_t lw_reps = tgpm::portfolio::kDefaultBootstrapReps;
  std::optional<std::size_t> block_length;
  std::string fallback = "hold-previous", aggregate = "compound";
  bool demean = true, scatter_rescale = false, no_tests = false;
};

int run_backtest(const BacktestArgs& a) {
  namespace pf = tgpm::portfolio;
  pf::BacktestConfig config;
  config.window_size = a.ws;
  config.rebalance_period = a.tau;
  if (!a.nu.empty()) config.nu_list = a.nu;
  config.estimators.clear();
  for (const auto& name : tgpm::split(a.estimators, ',')) {
    const auto kind = tgpm::gpm::parse_kind(tgpm::trim(name));
    if (!kind) throw UsageError("unknown estimator '" + name + "'");
    config.estimators.push_back(*kind);
  }
  config.region_threshold = a.threshold;
  config.region_pair = {a.pair[0], a.pair[1]};
  config.estimator_options.demean = a.demean;
  config.estimator_options.scatter_rescale = a.scatter_rescale;
  config.annualization_factor = a.annualization;
  config.fallback = a.fallback == "fail"          ? pf::FallbackPolicy::Fail
                    : a.fallback == "skip-window" ? pf::FallbackPolicy::SkipWindow
                                                  : pf::FallbackPolicy::HoldPrevious;
  config.aggregation = a.aggregate == "simple-sum" ? pf::Aggregation::SimpleSum : pf::Aggregation::Compound;
  config.run_variance_tests = !a.no_tests;
  config.seed = a.seed;
  config.bootstrap_reps = a.lw_reps;
  config.block_length = a.block_length;
  try {
    config.validate();
  } catch (const tgpm::Error& e) {
    throw UsageError(e.what());
  }

  const auto panel = load_panel(a.input, a.format);
  const auto report = pf::rolling_backtest(panel, config);
  const auto written = tgpm::io::write_backtest_outputs(report, a.outdir);

  for (const auto& note : report.notices) std::cerr << "tgpm: " << note << "\n";
  for (const auto& run : report.runs) {
    for (const auto& note : run.notices) std::cerr << "tgpm: " << run.label << ": " << note << "\n";
  }
  std::printf("%-16s %14s %14s %10s %10s %8s\n", "estimator", "ann_mean", "ann_var", "ann_SR", "TO", "p");
  for (const auto& run : report.runs) {
    if (!run.metrics) continue;
    const auto& m = *run.metrics;
    std::string p = "-";
    if (run.test_vs_inverse) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f%s", run.test_vs_inverse->p_value,
                    pf::significance_stars(run.test_vs_inverse->p_value).c_str());
      p = buf;
    }
    std::printf("%-16s %14.6g %14.6g %10.4f %10.4f %8s\n", run.label.c_str(), m.annualized_mean,
                m.annualized_variance, m.annualized_sharpe, m.turnover, p.c_str());
  }

  json cfg = {{"input", a.input},     {"format", a.format}, {"ws", a.ws},
              {"tau", a.tau},         {"nu", config.nu_list}, {"estimators", a.estimators},
              {"annualization", config.annualization()},
              {"fallback", a.fallback}, {"aggregate", a.aggregate}, {"lw_reps", a.lw_reps},
              {"variance_tests", !a.no_tests}, {"demean", a.demean},
              {"scatter_rescale", a.scatter_rescale}, {"outdir", a.outdir}};
  if (a.threshold) {
    cfg["region_threshold"] = *a.threshold;
    cfg["pair"] = a.pair;
  }
  if (a.block_length) cfg["block_length"] = *a.block_length;
  const auto report_path = written.front();
  write_manifest(report_path, "backtest", cfg, {a.input}, a.seed, written);
  return 0;
}

struct GridArgs {
  double nu = 6.0, rho = 0.7;
  std::vector<double> range{-4.0, 4.0};
  std::size_t steps = 101;
  std::string output;
};

int run_ldf_grid(const GridArgs& a) {
  if (!(std::abs(a.rho) < 1.0)) throw UsageError("--rho must satisfy |rho| < 1");
  if (a.steps < 2) throw UsageError("--steps must be at least 2");
  if (!(a.range[0] < a.range[1])) throw UsageError("--range needs min < max");
  if (!(a.nu > 0.0)) throw UsageError("--nu must be positive");
  const auto params = tgpm::ldf::TStudentParams::bivariate(a.rho, a.nu);
  const tgpm::ldf::GridAxis axis{a.range[0], a.range[1], a.steps};
  const auto grid = tgpm::ldf::ldf_grid(params, {0, 1}, axis, axis);
  std::ostringstream os;
  tgpm::ldf::write_ldf_grid_csv(os, grid);
  tgpm::write_file_atomic(a.output, os.str());
  json cfg = {{"nu", a.nu}, {"rho", a.rho}, {"range", a.range}, {"steps", a.steps}, {"output", a.output}};
  write_manifest(a.output, "ldf-grid", cfg, {}, std::nullopt, {a.output});
  return 0;
}

struct SimulateArgs {
  std::size_t n = 1000;
  Eigen::Index d = 2;
  double nu = 6.0, scale = 1.0;
  std::optional<double> rho;
  std::string sigma_file, output;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a) {
  if (a.n < 1) throw UsageError("--n must be at least 1");
  if (!(a.nu > 0.0)) throw UsageError("--nu must be positive");
  if (!(a.scale > 0.0)) throw UsageError("--scale must be positive");
  tgpm::Matrix sigma;
  if (!a.sigma_file.empty()) {
    sigma = load_sigma_file(a.sigma_file);
  } else {
    if (a.d < 1) throw UsageError("--d must be at least 1");
    const double rho = a.rho.value_or(0.0);
    if (!(std::abs(rho) < 1.0)) throw UsageError("--rho must satisfy |rho| < 1");
    sigma = tgpm::Matrix::Constant(a.d, a.d, rho);
    sigma.diagonal().setOnes();
  }
  tgpm::ldf::TStudentParams params{tgpm::Vector::Zero(sigma.rows()),
                                   tgpm::numerics::SpdMatrix(a.scale * sigma), a.nu};
  try {
    params.validate();
    (void)tgpm::numerics::cholesky(params.sigma);
  } catch (const tgpm::Error& e) {
    if (a.sigma_file.empty()) throw UsageError(e.what());
    throw;
  }
  const auto panel = tgpm::data::simulate_t(a.n, params, a.seed);
  std::ostringstream os;
  tgpm::data::write_returns_csv(os, panel);
  tgpm::write_file_atomic(a.output, os.str());
  json cfg = {{"n", a.n}, {"d", sigma.rows()}, {"nu", a.nu}, {"scale", a.scale}, {"output", a.output}};
  std::vector<std::string> inputs;
  if (!a.sigma_file.empty()) {
    cfg["sigma_file"] = a.sigma_file;
    inputs.push_back(a.sigma_file);
  } else {
    cfg["rho"] = a.rho.value_or(0.0);
  }
  write_manifest(a.output, "simulate", cfg, inputs, a.seed, {a.output});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized precision matrix estimation and minimum-variance backtests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TGPM_VERSION);

  const std::vector<std::string> formats{"csv", "ff", "prices"};
  const std::vector<std::string> kinds{"inv", "signed", "abs", "taylor", "region"};

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate a precision or GPM matrix from a returns panel");
  c_est->add_option("--input", est.input, "Input panel")->required()->check(CLI::ExistingFile);
  c_est->add_option("--format", est.format, "csv (returns), prices, or ff")->check(CLI::IsMember(formats));
  c_est->add_option("--estimator", est.estimator)->check(CLI::IsMember(kinds));
  c_est->add_option("--nu", est.nu, "Degrees of freedom")->check(CLI::PositiveNumber);
  c_est->add_option("--region-threshold", est.threshold);
  c_est->add_option("--pair", est.pair, "Region variable pair (0-based)")->expected(2);
  c_est->add_flag("--demean,!--no-demean", est.demean, "Center the window at its mean (default on)");
  c_est->add_flag("--scatter-rescale", est.scatter_rescale, "Use (nu-2)/nu times the covariance as scatter");
  c_est->add_option("--output", est.output, "Estimate JSON path")->required();

  BacktestArgs bt;
  auto* c_bt = app.add_subcommand("backtest", "Rolling-window minimum-variance backtest");
  c_bt->add_option("--input", bt.input)->required()->check(CLI::ExistingFile);
  c_bt->add_option("--format", bt.format)->check(CLI::IsMember(formats));
  c_bt->add_option("--ws", bt.ws, "Window size")->check(CLI::Range(2, 1 << 30));
  c_bt->add_option("--tau", bt.tau, "Rebalance period")->check(CLI::Range(1, 1 << 30));
  c_bt->add_option("--nu", bt.nu, "Degrees of freedom (repeatable)")->check(CLI::PositiveNumber);
  c_bt->add_option("--estimators", bt.estimators, "Comma list of inv,signed,abs,taylor,region");
  c_bt->add_option("--annualization", bt.annualization, "Default 252 / tau")->check(CLI::PositiveNumber);
  c_bt->add_option("--region-threshold", bt.threshold);
  c_bt->add_option("--pair", bt.pair)->expected(2);
  c_bt->add_option("--seed", bt.seed, "Bootstrap seed")->required();
  c_bt->add_option("--lw-reps", bt.lw_reps)->check(CLI::Range(999, 10000000));
  c_bt->add_option("--block-length", bt.block_length)->check(CLI::PositiveNumber);
  c_bt->add_option("--fallback", bt.fallback)
      ->check(CLI::IsMember({"hold-previous", "skip-window", "fail"}));
  c_bt->add_option("--aggregate", bt.aggregate)->check(CLI::IsMember({"compound", "simple-sum"}));
  c_bt->add_flag("--demean,!--no-demean", bt.demean);
  c_bt->add_flag("--scatter-rescale", bt.scatter_rescale);
  c_bt->add_flag("--no-variance-tests", bt.no_tests);
  c_bt->add_option("--outdir", bt.outdir)->required();

  GridArgs grid;
  auto* c_grid = app.add_subcommand("ldf-grid", "Tabulate the bivariate t local dependence function");
  c_grid->add_option("--nu", grid.nu);
  c_grid->add_option("--rho", grid.rho);
  c_grid->add_option("--range", grid.range)->expected(2);
  c_grid->add_option("--steps", grid.steps);
  c_grid->add_option("--output", grid.output)->required();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Draw a multivariate t returns panel");
  c_sim->add_option("--n", sim.n);
  c_sim->add_option("--d", sim.d);
  c_sim->add_option("--nu", sim.nu);
  auto* o_rho = c_sim->add_option("--rho", sim.rho, "Equicorrelation");
  auto* o_sig = c_sim->add_option("--sigma-file", sim.sigma_file, "CSV scatter matrix")->check(CLI::ExistingFile);
  o_rho->excludes(o_sig);
  c_sim->add_option("--scale", sim.scale, "Multiplier on the scatter matrix");
  c_sim->add_option("--seed", sim.seed)->required();
  c_sim->add_option("--output", sim.output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_est->parsed()) {
      if (est.pair.size() != 2) throw UsageError("--pair takes two indices");
      return run_estimate(est);
    }
    if (c_bt->parsed()) return run_backtest(bt);
    if (c_grid->parsed()) return run_ldf_grid(grid);
    if (c_sim->parsed()) return run_simulate(sim);
  } catch (const UsageError& e) {
    std::cerr << "tgpm: usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tgpm: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
