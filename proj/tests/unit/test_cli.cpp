#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include <json.hpp>

#include "support/oracles.hpp"

namespace {

const std::string kCli = TGPM_CLI_PATH;

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json strip_timestamp(const std::string& path) {
  auto j = nlohmann::json::parse(oracle::read_file(path));
  j.erase("timestamp");
  return j;
}

}  // namespace

TEST_CASE("exit codes") {
  if (kCli.empty()) SKIP("CLI not built");
  const auto dir = oracle::temp_dir("cli_exit");
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("ldf-grid --rho 1.0 --output " + dir + "/g.csv") == 2);
  CHECK(run("simulate --n 10 --d 2 --output " + dir + "/s.csv") == 2);  // seed required
  CHECK(run("estimate --input " + dir + "/missing.csv --output " + dir + "/e.json") == 2);

  std::ofstream(dir + "/bad.csv") << "date,A,B\n2020-01-01,1,x\n";
  CHECK(run("estimate --input " + dir + "/bad.csv --output " + dir + "/e.json") == 1);
  CHECK(run("simulate --n 10 --d 2 --seed 1 --output " + dir + "/s.csv") == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("estimate: region at threshold 0 equals signed, inv equals inverse covariance") {
  if (kCli.empty()) SKIP("CLI not built");
  const auto dir = oracle::temp_dir("cli_est");
  REQUIRE(run("simulate --n 300 --d 3 --nu 6 --rho 0.4 --seed 3 --output " + dir + "/s.csv") == 0);
  REQUIRE(run("estimate --input " + dir + "/s.csv --estimator signed --output " + dir + "/signed.json") == 0);
  REQUIRE(run("estimate --input " + dir +
              "/s.csv --estimator region --region-threshold 0 --output " + dir + "/region.json") == 0);
  REQUIRE(run("estimate --input " + dir + "/s.csv --estimator inv --output " + dir + "/inv.json") == 0);
  const auto s = nlohmann::json::parse(oracle::read_file(dir + "/signed.json"));
  const auto r = nlohmann::json::parse(oracle::read_file(dir + "/region.json"));
  CHECK(s["matrix"].dump() == r["matrix"].dump());

  std::ifstream in(dir + "/s.csv");
  std::string line;
  std::getline(in, line);
  std::vector<tgpm::Vector> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    tgpm::Vector v(3);
    for (int j = 0; j < 3; ++j) {
      std::getline(ss, cell, ',');
      v(j) = std::stod(cell);
    }
    rows.push_back(v);
  }
  tgpm::Matrix x(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  const tgpm::Matrix c = x.rowwise() - x.colwise().mean();
  const tgpm::Matrix inv = oracle::gauss_jordan_inverse(c.transpose() * c / (x.rows() - 1.0));
  const auto j = nlohmann::json::parse(oracle::read_file(dir + "/inv.json"));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(std::abs(j["matrix"][a][b].get<double>() - inv(a, b)) < 1e-9);

  const auto m = nlohmann::json::parse(oracle::read_file(dir + "/inv.json.manifest.json"));
  CHECK(m["subcommand"] == "estimate");
  CHECK(m["inputs"][0]["sha256"].get<std::string>().size() == 64);
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest digests follow the input bytes") {
  if (kCli.empty()) SKIP("CLI not built");
  const auto dir = oracle::temp_dir("cli_digest");
  std::ofstream(dir + "/a.csv") << "date,A,B\n2020-01-01,0.1,0.2\n2020-01-02,0.3,0.1\n2020-01-03,-0.1,0.0\n"
                                   "2020-01-04,0.2,0.2\n";
  REQUIRE(run("estimate --estimator inv --input " + dir + "/a.csv --output " + dir + "/1.json") == 0);
  REQUIRE(run("estimate --estimator inv --input " + dir + "/a.csv --output " + dir + "/2.json") == 0);
  std::ofstream(dir + "/a.csv", std::ios::app) << "2020-01-05,0.0,0.1\n";
  REQUIRE(run("estimate --estimator inv --input " + dir + "/a.csv --output " + dir + "/3.json") == 0);
  auto digest = [&](const std::string& n) {
    return strip_timestamp(dir + "/" + n + ".json.manifest.json")["inputs"][0]["sha256"];
  };
  CHECK(digest("1") == digest("2"));
  CHECK(digest("1") != digest("3"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("backtest with T = ws + tau reports one window and skips the test") {
  if (kCli.empty()) SKIP("CLI not built");
  const auto dir = oracle::temp_dir("cli_bt");
  REQUIRE(run("simulate --n 120 --d 3 --nu 6 --scale 0.0001 --seed 2 --output " + dir + "/s.csv") == 0);
  REQUIRE(run("backtest --input " + dir + "/s.csv --ws 100 --tau 20 --seed 1 --outdir " + dir + "/out") == 0);
  const auto rep = nlohmann::json::parse(oracle::read_file(dir + "/out/report.json"));
  CHECK(rep["windows"] == 1);
  CHECK(rep["runs"][1]["test_vs_inverse"].is_null());
  CHECK(rep["runs"][1]["notices"].dump().find("variance test skipped") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("estimate: signed with huge nu approaches inv on Gaussian-like data") {
  if (kCli.empty()) SKIP("CLI not built");
  const auto dir = oracle::temp_dir("cli_gauss");
  REQUIRE(run("simulate --n 5000 --d 3 --nu 1e7 --rho 0.5 --seed 4 --output " + dir + "/g.csv") == 0);
  REQUIRE(run("estimate --input " + dir + "/g.csv --estimator inv --output " + dir + "/inv.json") == 0);
  REQUIRE(run("estimate --input " + dir + "/g.csv --estimator signed --nu 1e6 --output " + dir + "/s.json") == 0);
  const auto a = nlohmann::json::parse(oracle::read_file(dir + "/inv.json"))["matrix"];
  const auto b = nlohmann::json::parse(oracle::read_file(dir + "/s.json"))["matrix"];
  double num = 0, den = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double x = a[i][j].get<double>(), y = b[i][j].get<double>();
      num += (x - y) * (x - y);
      den += x * x;
    }
  CHECK(std::sqrt(num / den) < 0.05);
  std::filesystem::remove_all(dir);
}
