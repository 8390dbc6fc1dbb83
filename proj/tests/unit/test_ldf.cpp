#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "tgpm/errors.hpp"
#include "tgpm/ldf.hpp"

using namespace tgpm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ldf::TStudentParams random_params(Eigen::Index d, double nu, std::mt19937_64& rng) {
  return {oracle::random_vector(d, rng, 0.3), numerics::SpdMatrix(oracle::random_spd(d, rng)), nu};
}

}  // namespace

TEST_CASE("t log density matches the direct formula") {
  std::mt19937_64 rng(21);
  for (double nu : {1.0, 3.0, 6.5, 30.0}) {
    const auto params = random_params(3, nu, rng);
    for (int i = 0; i < 10; ++i) {
      const Vector x = oracle::random_vector(3, rng, 2.0);
      CHECK_THAT(ldf::t_log_density(x, params),
                 WithinAbs(oracle::t_log_density(x, params.mu, params.sigma.matrix(), nu), 1e-11));
    }
  }
}

TEST_CASE("univariate standard t density at zero") {
  ldf::TStudentParams p{Vector::Zero(1), numerics::SpdMatrix::identity(1), 1.0};
  // Cauchy: 1 / pi.
  CHECK_THAT(ldf::t_log_density(Vector::Zero(1), p), WithinAbs(-std::log(M_PI), 1e-14));
}

TEST_CASE("exact LDF matches the hand-derived entries and a five-point Hessian") {
  std::mt19937_64 rng(8);
  for (Eigen::Index d : {1, 2, 4}) {
    for (double nu : {3.0, 6.0, 9.0}) {
      const auto params = random_params(d, nu, rng);
      for (int i = 0; i < 5; ++i) {
        const Vector x = oracle::random_vector(d, rng, 1.5);
        const Matrix g = ldf::ldf_t_exact(x, params);
        const Matrix closed = oracle::t_ldf_closed(x, params.mu, params.sigma.matrix(), nu);
        CHECK((g - closed).cwiseAbs().maxCoeff() < 1e-11);
        const Matrix fd = oracle::hessian_fd(
            [&](const Vector& y) { return oracle::t_log_density(y, params.mu, params.sigma.matrix(), nu); }, x,
            1e-3);
        CHECK((g - fd).cwiseAbs().maxCoeff() < 1e-6);
      }
    }
  }
}

TEST_CASE("bivariate LDF at the origin") {
  for (double rho : {0.0, 0.5, -0.7}) {
    const auto p = ldf::TStudentParams::bivariate(rho, 6.0);
    const Matrix g = ldf::ldf_t_exact(Vector::Zero(2), p);
    // -((nu+d)/nu) Sigma^{-1}, off-diagonal rho / (1 - rho^2) times 8/6.
    CHECK_THAT(g(0, 1), WithinAbs((8.0 / 6.0) * rho / (1 - rho * rho), 1e-14));
    CHECK_THAT(g(0, 0), WithinAbs(-(8.0 / 6.0) / (1 - rho * rho), 1e-14));
  }
}

TEST_CASE("Gaussian LDF is the negated precision") {
  Matrix s(2, 2);
  s << 2, 0.3, 0.3, 1;
  const Matrix g = ldf::ldf_gaussian(numerics::SpdMatrix(s));
  CHECK((g + oracle::gauss_jordan_inverse(s)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("numeric LDF is exact up to rounding on a quadratic") {
  Matrix a(3, 3);
  a << 2, 0.5, -1, 0.5, 3, 0.25, -1, 0.25, 1;
  auto f = [&](const Vector& x) { return -0.5 * x.dot(a * x) + x.sum(); };
  const Matrix g = ldf::ldf_numeric(f, Vector::Constant(3, 0.3), 1e-3);
  CHECK((g + a).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("numeric LDF reports a non-finite stencil value") {
  auto f = [](const Vector& x) { return x(0) > 0.0 ? std::log(x(0)) : -INFINITY; };
  try {
    ldf::ldf_numeric(f, Vector::Constant(1, 5e-5), 1e-4);
    FAIL("expected NonFiniteDensity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteDensity);
  }
}

TEST_CASE("Taylor LDF error shrinks at fifth order toward the center") {
  std::mt19937_64 rng(4);
  const auto params = random_params(3, 6.0, rng);
  const Vector dir = oracle::random_vector(3, rng).normalized();
  double prev = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double r = 0.2 / std::pow(2.0, k);
    const Vector x = params.mu + r * dir;
    const double err = (ldf::ldf_t_taylor(x, params) - ldf::ldf_t_exact(x, params)).cwiseAbs().maxCoeff();
    if (k > 0) CHECK(std::log2(prev / err) > 5.5);
    prev = err;
  }
  CHECK((ldf::ldf_t_taylor(params.mu, params) - ldf::ldf_t_exact(params.mu, params)).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("parameter validation") {
  auto kind = [](const ldf::TStudentParams& p) {
    try {
      p.validate();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind({Vector::Zero(2), numerics::SpdMatrix::identity(2), 0.0}) == ErrorKind::InvalidArgument);
  CHECK(kind({Vector::Zero(3), numerics::SpdMatrix::identity(2), 5.0}) == ErrorKind::DimensionMismatch);
  Matrix bad(2, 2);
  bad << 1, 1, 1, 1;
  try {
    ldf::TStudentModel model({Vector::Zero(2), numerics::SpdMatrix(bad), 5.0});
    FAIL("singular scatter accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
  }
}

TEST_CASE("grid axis hits the endpoints and is symmetric") {
  const auto v = ldf::GridAxis{-4, 4, 101}.values();
  REQUIRE(v.size() == 101);
  CHECK(v.front() == -4.0);
  CHECK(v.back() == 4.0);
  CHECK(v[50] == 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == -v[v.size() - 1 - i]);
}

TEST_CASE("LDF grid values and CSV layout") {
  const auto p = ldf::TStudentParams::bivariate(0.0, 6.0);
  const auto grid = ldf::ldf_grid(p, {0, 1}, {-1, 1, 3}, {-2, 2, 5});
  REQUIRE(grid.values.rows() == 3);
  REQUIRE(grid.values.cols() == 5);
  CHECK(std::abs(grid.values(1, 2)) < 1e-12);
  Vector x(2);
  x << 1.0, -2.0;
  CHECK_THAT(grid.values(2, 0), WithinAbs(ldf::ldf_t_exact(x, p)(0, 1), 1e-15));

  std::ostringstream os;
  ldf::write_ldf_grid_csv(os, grid);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,gamma");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 15);
}

TEST_CASE("opposite correlations give mirrored grids") {
  const ldf::GridAxis axis{-3, 3, 31};
  const auto pos = ldf::ldf_grid(ldf::TStudentParams::bivariate(0.7, 6.0), {0, 1}, axis, axis);
  const auto neg = ldf::ldf_grid(ldf::TStudentParams::bivariate(-0.7, 6.0), {0, 1}, axis, axis);
  for (Eigen::Index i = 0; i < 31; ++i)
    for (Eigen::Index j = 0; j < 31; ++j) CHECK_THAT(neg.values(i, 30 - j), WithinAbs(-pos.values(i, j), 1e-13));
}
