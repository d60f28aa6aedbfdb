#include "portfolio/market_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "portfolio/errors.hpp"

namespace portfolio {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

bool is_gap(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan" ||
         cell == "null" || cell == "NULL" || cell == ".";
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

}  // namespace

PriceTable parse_prices(std::string_view text, const CsvFormat& format, std::string_view source) {
  PriceTable table;
  std::vector<std::vector<double>> rows;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto cells = split(line, format.delimiter);
    if (!header_seen) {
      if (cells.size() < 2)
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: header needs a date column and at least one asset", source, line_no));
      std::set<std::string> seen;
      for (std::size_t c = 1; c < cells.size(); ++c) {
        std::string name(cells[c]);
        if (name.empty())
          throw Error(ErrorCode::ParseError, fmt::format("{}:{}: empty asset header in column {}", source, line_no, c + 1));
        if (!seen.insert(name).second)
          throw Error(ErrorCode::DuplicateAsset, fmt::format("{}:{}: duplicate asset header '{}'", source, line_no, name));
        table.assets.push_back(std::move(name));
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != table.assets.size() + 1)
      throw Error(ErrorCode::ParseError, fmt::format("{}:{}: expected {} fields, found {}", source, line_no,
                                                     table.assets.size() + 1, cells.size()));
    if (format.iso_dates && !is_iso_date(cells[0]))
      throw Error(ErrorCode::ParseError, fmt::format("{}:{}: malformed date '{}'", source, line_no, cells[0]));
    table.dates.emplace_back(cells[0]);

    std::vector<double> row(table.assets.size());
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto cell = cells[c];
      if (is_gap(cell)) {
        row[c - 1] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last)
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: column {} ('{}'): malformed number '{}'", source, line_no, c + 1,
                                table.assets[c - 1], cell));
      if (std::isfinite(v) && v <= 0.0)
        throw Error(ErrorCode::NonPositivePrice,
                    fmt::format("{}:{}: column {} ('{}'): non-positive price {}", source, line_no, c + 1,
                                table.assets[c - 1], cell));
      row[c - 1] = v;
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, fmt::format("{}: empty file", source));

  const auto t = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(table.assets.size());
  table.values.resize(t, n);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < n; ++j) table.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

  if (format.iso_dates)
    for (std::size_t i = 1; i < table.dates.size(); ++i)
      if (!(table.dates[i - 1] < table.dates[i]))
        throw Error(ErrorCode::ParseError, fmt::format("{}: dates not strictly increasing at '{}'", source, table.dates[i]));

  if (format.fill_gaps) table = fill_missing(table);
  validate(table);
  return table;
}

PriceTable load_prices(const std::filesystem::path& path, const CsvFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return parse_prices(text, format, path.string());
}

PriceTable fill_missing(const PriceTable& raw) {
  PriceTable out = raw;
  for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
      if (!std::isnan(out.values(i, j))) continue;
      if (i == 0)
        throw Error(ErrorCode::LeadingGap,
                    fmt::format("asset '{}' has no value in the first row", out.assets[static_cast<std::size_t>(j)]));
      out.values(i, j) = out.values(i - 1, j);
    }
  }
  return out;
}

void validate(const PriceTable& prices) {
  const auto n = prices.values.cols();
  if (static_cast<std::size_t>(n) != prices.assets.size())
    throw Error(ErrorCode::InvalidArgument, "price matrix width does not match asset list");
  if (!prices.dates.empty() && static_cast<std::size_t>(prices.values.rows()) != prices.dates.size())
    throw Error(ErrorCode::InvalidArgument, "price matrix height does not match date list");
  if (prices.values.rows() < 2)
    throw Error(ErrorCode::InsufficientHistory,
                fmt::format("need at least 2 price rows, found {}", prices.values.rows()));
  std::set<std::string_view> seen;
  for (const auto& a : prices.assets)
    if (!seen.insert(a).second) throw Error(ErrorCode::DuplicateAsset, fmt::format("duplicate asset '{}'", a));
  for (Eigen::Index i = 0; i < prices.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = prices.values(i, j);
      if (!std::isfinite(v))
        throw Error(ErrorCode::NonFiniteValue, fmt::format("row {}, asset '{}': non-finite price", i + 1,
                                                           prices.assets[static_cast<std::size_t>(j)]));
      if (v <= 0.0)
        throw Error(ErrorCode::NonPositivePrice, fmt::format("row {}, asset '{}': non-positive price {}", i + 1,
                                                             prices.assets[static_cast<std::size_t>(j)], v));
    }
  }
}

ReturnsMatrix assets_return(const PriceTable& prices) {
  validate(prices);
  ReturnsMatrix r;
  r.assets = prices.assets;
  const auto t = prices.values.rows() - 1;
  r.values.resize(t, prices.values.cols());
  for (Eigen::Index j = 0; j < prices.values.cols(); ++j)
    for (Eigen::Index i = 0; i < t; ++i) r.values(i, j) = prices.values(i + 1, j) / prices.values(i, j) - 1.0;
  return r;
}

}  // namespace portfolio
