#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpcfolio/model.hpp"

namespace mpcfolio {

/// Daily close prices: one row per date, one column per asset.
struct PriceTable {
  std::vector<std::string> dates;   ///< ISO-8601 (YYYY-MM-DD), strictly increasing
  std::vector<std::string> assets;
  Mat prices;                       ///< dates.size() x assets.size(), strictly positive
};

/// Parses `date,<asset1>,...,<assetN>` CSV text. Errors carry one-based line numbers.
PriceTable parse_prices(std::istream& in);
PriceTable load_prices(const std::filesystem::path& path);

void write_prices(std::ostream& out, const PriceTable& table);

/// Simple returns (P(t+1) - P(t)) / P(t); row t of the result is the return over (t, t+1].
Mat prices_to_returns(const Mat& prices);

/// True for a valid calendar date written as YYYY-MM-DD.
bool is_iso_date(const std::string& s);

/// `count` consecutive weekdays starting at `first` (moved forward to a weekday).
std::vector<std::string> business_days(const std::string& first, std::size_t count);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace mpcfolio
