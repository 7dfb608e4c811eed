#include "mpcfolio/price_data.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mpcfolio/errors.hpp"

namespace mpcfolio {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::chrono::year_month_day parse_ymd(const std::string& s) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const char* p = s.data();
  const char* end = s.data() + s.size();
  auto r1 = std::from_chars(p, p + 4, y);
  auto r2 = std::from_chars(p + 5, p + 7, m);
  auto r3 = std::from_chars(p + 8, end, d);
  if (r1.ec != std::errc{} || r2.ec != std::errc{} || r3.ec != std::errc{} || r3.ptr != end) {
    return std::chrono::year_month_day{};
  }
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                     std::chrono::day{d}};
}

std::string format_ymd(const std::chrono::year_month_day& ymd) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return parse_ymd(s).ok();
}

PriceTable parse_prices(std::istream& in) {
  PriceTable table;
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw DataError("price file is empty; expected a header row", 1);
  ++lineno;
  auto header = split_csv(line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 2 || header[0] != "date") {
    throw DataError("header must be `date,<asset1>,...,<assetN>`", lineno);
  }
  table.assets.assign(header.begin() + 1, header.end());
  for (std::size_t j = 0; j < table.assets.size(); ++j) {
    if (table.assets[j].empty()) {
      throw DataError("empty asset name in header column " + std::to_string(j + 2), lineno);
    }
  }
  const std::size_t n = table.assets.size();

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != n + 1) {
      throw DataError("expected " + std::to_string(n + 1) + " fields, found " +
                          std::to_string(cells.size()),
                      lineno);
    }
    const std::string date = trim(cells[0]);
    if (!is_iso_date(date)) throw DataError("invalid ISO-8601 date `" + date + "`", lineno);
    if (!table.dates.empty() && !(table.dates.back() < date)) {
      throw DataError("dates must be strictly increasing (`" + date + "` follows `" +
                          table.dates.back() + "`)",
                      lineno);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::string cell = trim(cells[j + 1]);
      if (cell.empty()) {
        throw DataError("missing price for asset `" + table.assets[j] + "`", lineno);
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError("malformed price `" + cell + "` for asset `" + table.assets[j] + "`",
                        lineno);
      }
      if (!(v > 0.0)) {
        throw DataError("non-positive price " + cell + " for asset `" + table.assets[j] + "`",
                        lineno);
      }
      values.push_back(v);
    }
    table.dates.push_back(date);
  }

  const auto rows = static_cast<Eigen::Index>(table.dates.size());
  table.prices.resize(rows, static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      table.prices(r, static_cast<Eigen::Index>(j)) = values[static_cast<std::size_t>(r) * n + j];
    }
  }
  return table;
}

PriceTable load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file " + path.string());
  try {
    return parse_prices(in);
  } catch (const DataError& e) {
    const std::string where =
        e.line() > 0 ? path.string() + ":" + std::to_string(e.line()) : path.string();
    throw DataError(where + ": " + e.what(), e.line());
  }
}

void write_prices(std::ostream& out, const PriceTable& table) {
  out << "date";
  for (const auto& a : table.assets) out << ',' << a;
  out << '\n';
  for (Eigen::Index r = 0; r < table.prices.rows(); ++r) {
    out << table.dates[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < table.prices.cols(); ++j) out << ',' << format_double(table.prices(r, j));
    out << '\n';
  }
}

Mat prices_to_returns(const Mat& prices) {
  if ((prices.array() <= 0.0).any()) throw DataError("prices must be strictly positive");
  if (prices.rows() < 2) return Mat(0, prices.cols());
  const Eigen::Index t = prices.rows() - 1;
  return (prices.bottomRows(t).array() - prices.topRows(t).array()) / prices.topRows(t).array();
}

std::vector<std::string> business_days(const std::string& first, std::size_t count) {
  using namespace std::chrono;
  if (!is_iso_date(first)) throw InvalidArgument("invalid start date `" + first + "`");
  sys_days day{parse_ymd(first)};
  std::vector<std::string> out;
  out.reserve(count);
  while (out.size() < count) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) out.push_back(format_ymd(year_month_day{day}));
    day += days{1};
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace mpcfolio
