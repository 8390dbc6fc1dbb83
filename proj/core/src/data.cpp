#include "tgpm/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "tgpm/errors.hpp"
#include "tgpm/text.hpp"

namespace tgpm::data {

namespace {

std::string located(std::size_t line, std::size_t column, const std::string& msg) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_missing(std::string_view cell) {
  const std::string c = lower(trim(cell));
  return c.empty() || c == "na" || c == "nan" || c == "null" || c == "n/a";
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::int64_t> parse_digits(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open " + path);
  return in;
}

struct RawPanel {
  std::vector<std::string> dates;
  std::vector<std::string> assets;
  std::vector<std::vector<double>> rows;
};

void check_date_order(const std::vector<std::string>& dates) {
  std::optional<std::int64_t> prev;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const auto key = parse_date_key(dates[i]);
    if (!key) raise(ErrorKind::ParseError, "unrecognized date '" + dates[i] + "'");
    if (prev && *key <= *prev) {
      raise(ErrorKind::UnsortedDates, "date '" + dates[i] + "' (row " + std::to_string(i + 1) +
                                          ") does not follow '" + dates[i - 1] + "'");
    }
    prev = key;
  }
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

RawPanel parse_generic(std::istream& in, const std::string& date_column, char delimiter,
                       bool prices, LoadStats* stats) {
  RawPanel out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t date_idx = 0;
  std::size_t width = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, delimiter);

    if (!have_header) {
      const std::string wanted = lower(date_column);
      const auto it = std::find_if(cells.begin(), cells.end(),
                                   [&](const std::string& c) { return lower(trim(c)) == wanted; });
      if (it == cells.end()) {
        raise(ErrorKind::ParseError, located(line_no, 1, "no '" + date_column + "' column in header"));
      }
      date_idx = static_cast<std::size_t>(it - cells.begin());
      for (std::size_t j = 0; j < cells.size(); ++j) {
        if (j != date_idx) out.assets.emplace_back(trim(cells[j]));
      }
      if (out.assets.empty()) raise(ErrorKind::ParseError, located(line_no, 1, "header has no asset columns"));
      width = cells.size();
      have_header = true;
      continue;
    }

    if (cells.size() != width) {
      raise(ErrorKind::ParseError, located(line_no, cells.size(),
                                           "expected " + std::to_string(width) + " cells, found " +
                                               std::to_string(cells.size())));
    }
    std::vector<double> row;
    row.reserve(width - 1);
    bool missing = false;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j == date_idx) continue;
      if (is_missing(cells[j])) {
        missing = true;
        continue;
      }
      const auto v = parse_number(cells[j]);
      if (!v) raise(ErrorKind::ParseError, located(line_no, j + 1, "not a number: '" + cells[j] + "'"));
      if (prices && !(*v > 0.0)) {
        raise(ErrorKind::NonPositivePrice, located(line_no, j + 1, "price " + cells[j] + " is not positive"));
      }
      row.push_back(*v);
    }
    if (missing) {
      if (stats) {
        ++stats->dropped_rows;
        stats->dropped_lines.push_back(line_no);
      }
      continue;
    }
    const std::string date(trim(cells[date_idx]));
    if (!parse_date_key(date)) {
      raise(ErrorKind::ParseError, located(line_no, date_idx + 1, "unrecognized date '" + date + "'"));
    }
    out.dates.push_back(date);
    out.rows.push_back(std::move(row));
  }
  if (!have_header) raise(ErrorKind::ParseError, "input is empty");
  check_date_order(out.dates);
  return out;
}

}  // namespace

std::optional<std::int64_t> parse_date_key(std::string_view text) {
  text = trim(text);
  std::int64_t y = 0, m = 0, d = 0;
  if (text.size() == 8) {
    const auto v = parse_digits(text);
    if (!v) return std::nullopt;
    y = *v / 10000;
    m = (*v / 100) % 100;
    d = *v % 100;
  } else if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    const auto yy = parse_digits(text.substr(0, 4));
    const auto mm = parse_digits(text.substr(5, 2));
    const auto dd = parse_digits(text.substr(8, 2));
    if (!yy || !mm || !dd) return std::nullopt;
    y = *yy;
    m = *mm;
    d = *dd;
  } else {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year(static_cast<int>(y)),
                                        std::chrono::month(static_cast<unsigned>(m)),
                                        std::chrono::day(static_cast<unsigned>(d))};
  if (!ymd.ok()) return std::nullopt;
  return y * 10000 + m * 100 + d;
}

void ReturnsMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 1) raise(ErrorKind::InsufficientData, "empty returns panel");
  if (static_cast<Eigen::Index>(dates.size()) != values.rows() ||
      static_cast<Eigen::Index>(assets.size()) != values.cols()) {
    raise(ErrorKind::DimensionMismatch, "labels do not match the returns matrix");
  }
  if (!values.allFinite()) raise(ErrorKind::InvalidArgument, "returns contain non-finite values");
  check_date_order(dates);
}

PricePanel parse_price_csv(std::istream& in, const std::string& date_column, char delimiter,
                           LoadStats* stats) {
  RawPanel raw = parse_generic(in, date_column, delimiter, /*prices=*/true, stats);
  return PricePanel{std::move(raw.dates), raw.assets, to_matrix(raw.rows, raw.assets.size())};
}

PricePanel load_price_csv(const std::string& path, const std::string& date_column, char delimiter,
                          LoadStats* stats) {
  auto in = open_input(path);
  return parse_price_csv(in, date_column, delimiter, stats);
}

ReturnsMatrix parse_returns_csv(std::istream& in, const std::string& date_column, char delimiter,
                                LoadStats* stats) {
  RawPanel raw = parse_generic(in, date_column, delimiter, /*prices=*/false, stats);
  ReturnsMatrix out{std::move(raw.dates), raw.assets, to_matrix(raw.rows, raw.assets.size())};
  out.validate();
  return out;
}

ReturnsMatrix load_returns_csv(const std::string& path, const std::string& date_column,
                               char delimiter, LoadStats* stats) {
  auto in = open_input(path);
  return parse_returns_csv(in, date_column, delimiter, stats);
}

ReturnsMatrix log_returns(const PricePanel& prices) {
  const auto t = prices.prices.rows();
  if (t < 2) raise(ErrorKind::InsufficientData, "log returns need at least 2 price rows");
  if ((prices.prices.array() <= 0.0).any()) raise(ErrorKind::NonPositivePrice, "prices must be positive");
  ReturnsMatrix out;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.assets = prices.assets;
  out.values = (prices.prices.bottomRows(t - 1).array() / prices.prices.topRows(t - 1).array()).log();
  return out;
}

ReturnsMatrix parse_ff_industry(std::istream& in, LoadStats* stats) {
  std::vector<std::string> header;
  std::vector<std::string> dates;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool in_block = false;

  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = split(line, ',');
    const std::string_view first = trim(cells.front());
    const bool dated = first.size() == 8 && parse_date_key(first).has_value();

    if (!dated) {
      if (in_block) break;  // end of the daily block; later sections are ignored
      if (cells.size() > 1 && first.empty()) {
        header.clear();
        for (std::size_t j = 1; j < cells.size(); ++j) header.emplace_back(trim(cells[j]));
      }
      continue;
    }

    if (!in_block) {
      in_block = true;
      if (header.empty()) {
        for (std::size_t j = 1; j < cells.size(); ++j) header.push_back("P" + std::to_string(j));
      }
    }
    if (cells.size() != header.size() + 1) {
      raise(ErrorKind::ParseError, located(line_no, cells.size(),
                                           "expected " + std::to_string(header.size() + 1) +
                                               " cells, found " + std::to_string(cells.size())));
    }
    std::vector<double> row;
    row.reserve(header.size());
    bool sentinel = false;
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const auto v = parse_number(cells[j]);
      if (!v) raise(ErrorKind::ParseError, located(line_no, j + 1, "not a number: '" + cells[j] + "'"));
      if (*v == -99.99 || *v == -999.0) sentinel = true;
      row.push_back(*v / 100.0);
    }
    if (sentinel) {
      if (stats) {
        ++stats->dropped_rows;
        stats->dropped_lines.push_back(line_no);
      }
      continue;
    }
    dates.emplace_back(first);
    rows.push_back(std::move(row));
  }

  if (!in_block) raise(ErrorKind::UnrecognizedLayout, "no block of YYYYMMDD rows found");
  ReturnsMatrix out{std::move(dates), header, to_matrix(rows, header.size())};
  out.validate();
  return out;
}

ReturnsMatrix load_ff_industry(const std::string& path, LoadStats* stats) {
  auto in = open_input(path);
  return parse_ff_industry(in, stats);
}

void write_returns_csv(std::ostream& out, const ReturnsMatrix& returns) {
  out << "date";
  for (const auto& a : returns.assets) out << ',' << a;
  out << '\n';
  for (Eigen::Index i = 0; i < returns.rows(); ++i) {
    out << returns.dates[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < returns.cols(); ++j) out << ',' << format_double(returns.values(i, j));
    out << '\n';
  }
}

ReturnsMatrix simulate_t(std::size_t n, const ldf::TStudentParams& params, std::uint64_t seed) {
  params.validate();
  if (n < 1) raise(ErrorKind::InvalidArgument, "simulate_t needs n >= 1");
  const Matrix chol = numerics::cholesky(params.sigma);
  const auto d = params.dim();

  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(params.nu);

  ReturnsMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), d);
  Vector z(d);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(engine);
    const double w = chi2(engine);
    out.values.row(i) = (params.mu + std::sqrt(params.nu / w) * (chol * z)).transpose();
  }

  using namespace std::chrono;
  const sys_days start = year(2000) / January / 1;
  out.dates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const year_month_day ymd{start + days(static_cast<int>(i))};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    out.dates.emplace_back(buf);
  }
  for (Eigen::Index j = 0; j < d; ++j) out.assets.push_back("X" + std::to_string(j + 1));
  return out;
}

DescriptiveStats descriptive_stats(const ReturnsMatrix& returns) {
  const auto t = returns.rows();
  if (t < 4) raise(ErrorKind::InsufficientData, "descriptive statistics need at least 4 rows");
  DescriptiveStats out;
  out.observations = static_cast<std::size_t>(t);
  out.assets = static_cast<std::size_t>(returns.cols());

  std::size_t shape_count = 0;
  for (Eigen::Index j = 0; j < returns.cols(); ++j) {
    const auto col = returns.values.col(j);
    AssetMoments m;
    m.name = j < static_cast<Eigen::Index>(returns.assets.size())
                 ? returns.assets[static_cast<std::size_t>(j)]
                 : "X" + std::to_string(j + 1);
    m.mean = col.mean();
    if (col.maxCoeff() == col.minCoeff()) {
      m.mean = col(0);
      out.avg_mean += m.mean;
      out.per_asset.push_back(std::move(m));  // sd = 0, shape moments undefined
      continue;
    }
    const Eigen::ArrayXd dev = col.array() - m.mean;
    const double m2 = dev.square().mean();
    const double m3 = dev.cube().mean();
    const double m4 = dev.square().square().mean();
    m.sd = std::sqrt(dev.square().sum() / static_cast<double>(t - 1));
    if (m2 > 0.0) {
      m.skewness = m3 / std::pow(m2, 1.5);
      m.kurtosis = m4 / (m2 * m2);
      out.avg_skewness += *m.skewness;
      out.avg_kurtosis += *m.kurtosis;
      ++shape_count;
    }
    out.avg_mean += m.mean;
    out.avg_sd += m.sd;
    out.per_asset.push_back(std::move(m));
  }
  const double n_assets = static_cast<double>(returns.cols());
  out.avg_mean /= n_assets;
  out.avg_sd /= n_assets;
  if (shape_count > 0) {
    out.avg_skewness /= static_cast<double>(shape_count);
    out.avg_kurtosis /= static_cast<double>(shape_count);
  }
  return out;
}

}  // namespace tgpm::data
