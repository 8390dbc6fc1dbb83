#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgpm/ldf.hpp"
#include "tgpm/numerics.hpp"

namespace tgpm::data {

/// T x N panel of per-period decimal returns with date labels.
struct ReturnsMatrix {
  std::vector<std::string> dates;
  std::vector<std::string> assets;
  Matrix values;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }

  // Shape agreement, finite values, strictly increasing dates.
  void validate() const;
};

struct PricePanel {
  std::vector<std::string> dates;
  std::vector<std::string> assets;
  Matrix prices;
};

struct LoadStats {
  std::size_t dropped_rows = 0;
  std::vector<std::size_t> dropped_lines;  // 1-based line numbers
};

/// Sortable key for ISO-8601 (YYYY-MM-DD) or compact YYYYMMDD dates.
std::optional<std::int64_t> parse_date_key(std::string_view text);

// Generic layout: header `date,<asset1>,...`. Rows with any missing cell
// (empty, NA, NaN) are dropped and counted in `stats`.
PricePanel load_price_csv(const std::string& path, const std::string& date_column = "date",
                          char delimiter = ',', LoadStats* stats = nullptr);
PricePanel parse_price_csv(std::istream& in, const std::string& date_column = "date",
                           char delimiter = ',', LoadStats* stats = nullptr);
ReturnsMatrix load_returns_csv(const std::string& path, const std::string& date_column = "date",
                               char delimiter = ',', LoadStats* stats = nullptr);
ReturnsMatrix parse_returns_csv(std::istream& in, const std::string& date_column = "date",
                                char delimiter = ',', LoadStats* stats = nullptr);

/// r_t = ln(P_t / P_{t-1}); one row shorter than the price panel.
ReturnsMatrix log_returns(const PricePanel& prices);

// Kenneth French daily industry-portfolio layout: free-text preamble, a
// header line starting with a comma, then YYYYMMDD rows of percent returns.
// Only the first daily block is read. Percent values are divided by 100 and
// rows holding the -99.99 / -999 missing sentinels are dropped.
ReturnsMatrix load_ff_industry(const std::string& path, LoadStats* stats = nullptr);
ReturnsMatrix parse_ff_industry(std::istream& in, LoadStats* stats = nullptr);

void write_returns_csv(std::ostream& out, const ReturnsMatrix& returns);

/// n draws of X = mu + Z sqrt(nu / W), Z ~ N(0, Sigma), W ~ chi^2_nu.
/// The engine is std::mt19937_64 seeded with `seed`; per row, d standard
/// normals are drawn first, then one chi-square variate.
ReturnsMatrix simulate_t(std::size_t n, const ldf::TStudentParams& params, std::uint64_t seed);

struct AssetMoments {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> skewness;
  std::optional<double> kurtosis;  // non-excess
};

struct DescriptiveStats {
  std::size_t observations = 0;
  std::size_t assets = 0;
  std::vector<AssetMoments> per_asset;
  double avg_mean = 0.0;
  double avg_sd = 0.0;
  // Averaged over assets where the moment is defined.
  double avg_skewness = 0.0;
  double avg_kurtosis = 0.0;
};

DescriptiveStats descriptive_stats(const ReturnsMatrix& returns);

}  // namespace tgpm::data
