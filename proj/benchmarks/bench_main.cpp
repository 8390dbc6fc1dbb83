#include <benchmark/benchmark.h>

#include <random>

#include "tgpm/data.hpp"
#include "tgpm/gpm.hpp"
#include "tgpm/ldf.hpp"
#include "tgpm/portfolio.hpp"

namespace {

using tgpm::Matrix;
using tgpm::Vector;

Matrix scatter(Eigen::Index d) {
  Matrix s = Matrix::Constant(d, d, 0.3);
  s.diagonal().setOnes();
  return s * 1e-4;
}

tgpm::data::ReturnsMatrix panel(std::size_t t, Eigen::Index d) {
  return tgpm::data::simulate_t(t, {Vector::Zero(d), tgpm::numerics::SpdMatrix(scatter(d)), 6.0}, 1);
}

void BM_LdfExact(benchmark::State& state) {
  const auto d = state.range(0);
  const tgpm::ldf::TStudentModel model({Vector::Zero(d), tgpm::numerics::SpdMatrix(scatter(d) * 1e4), 6.0});
  const Vector x = Vector::Constant(d, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(model.ldf_exact(x));
}
BENCHMARK(BM_LdfExact)->Arg(3)->Arg(30);

void BM_LdfNumeric(benchmark::State& state) {
  const auto d = state.range(0);
  const tgpm::ldf::TStudentModel model({Vector::Zero(d), tgpm::numerics::SpdMatrix(scatter(d) * 1e4), 6.0});
  const Vector x = Vector::Constant(d, 0.3);
  const tgpm::ldf::LogDensity f = [&](const Vector& y) { return model.log_density(y); };
  for (auto _ : state) benchmark::DoNotOptimize(tgpm::ldf::ldf_numeric(f, x));
}
BENCHMARK(BM_LdfNumeric)->Arg(3)->Arg(30);

void BM_Estimator(benchmark::State& state) {
  const auto kind = static_cast<tgpm::gpm::EstimatorKind>(state.range(0));
  const auto p = panel(250, 30);
  tgpm::gpm::EstimatorSpec spec;
  spec.kind = kind;
  spec.region_threshold = 1e-4;
  for (auto _ : state) benchmark::DoNotOptimize(tgpm::gpm::estimate(spec, p.values));
  state.SetLabel(std::string(tgpm::gpm::short_name(kind)));
}
BENCHMARK(BM_Estimator)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

void BM_Backtest(benchmark::State& state) {
  const auto p = panel(5000, 30);
  tgpm::portfolio::BacktestConfig cfg;
  cfg.run_variance_tests = false;
  for (auto _ : state) benchmark::DoNotOptimize(tgpm::portfolio::rolling_backtest(p, cfg));
}
BENCHMARK(BM_Backtest)->Unit(benchmark::kMillisecond);

void BM_VarianceTest(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = z(rng);
    b[i] = z(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(tgpm::portfolio::lw_variance_test(a, b, 1));
}
BENCHMARK(BM_VarianceTest)->Arg(500)->Arg(1183)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
