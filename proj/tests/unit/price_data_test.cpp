#include <gtest/gtest.h>

#include <sstream>

#include "mpcfolio/errors.hpp"
#include "mpcfolio/price_data.hpp"

namespace mpcfolio {
namespace {

PriceTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_prices(in);
}

int error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParsePrices, ThreeRowsTwoAssets) {
  const auto t = parse(
      "date,AAA,BBB\n"
      "2020-01-02,100,50\n"
      "2020-01-03,101,49.5\n"
      "2020-01-06,99.99,51\n");
  ASSERT_EQ(t.assets, (std::vector<std::string>{"AAA", "BBB"}));
  ASSERT_EQ(t.dates.size(), 3u);
  EXPECT_EQ(t.dates[2], "2020-01-06");
  const Mat r = prices_to_returns(t.prices);
  ASSERT_EQ(r.rows(), 2);
  ASSERT_EQ(r.cols(), 2);
  EXPECT_NEAR(r(0, 0), 0.01, 1e-15);
  EXPECT_NEAR(r(0, 1), -0.01, 1e-15);
  EXPECT_NEAR(r(1, 0), 99.99 / 101.0 - 1.0, 1e-15);
  EXPECT_NEAR(r(1, 1), 51.0 / 49.5 - 1.0, 1e-15);
}

TEST(ParsePrices, AcceptsCrlfAndTrailingBlankLine) {
  const auto t = parse("date,X\r\n2021-03-01,10\r\n2021-03-02,11\r\n\r\n");
  EXPECT_EQ(t.prices.rows(), 2);
  EXPECT_DOUBLE_EQ(t.prices(1, 0), 11.0);
}

TEST(ParsePrices, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("date,A,B\n2020-01-02,1,2\n2020-01-03,0,2\n"), 3);
  EXPECT_EQ(error_line("date,A\n2020-01-03,1\n2020-01-02,1\n"), 3);
  EXPECT_EQ(error_line("date,A\n2020-01-03,1\n2020-01-03,1\n"), 3);
  EXPECT_EQ(error_line("date,A\n2020-02-30,1\n"), 2);
  EXPECT_EQ(error_line("date,A,B\n2020-01-02,1\n"), 2);
  EXPECT_EQ(error_line("date,A\n2020-01-02,abc\n"), 2);
  EXPECT_EQ(error_line("date,A\n2020-01-02,-3\n"), 2);
  EXPECT_EQ(error_line("date,A\n2020-01-02,\n"), 2);
  EXPECT_EQ(error_line("when,A\n"), 1);
  EXPECT_EQ(error_line(""), 1);
}

TEST(ParsePrices, RoundTripThroughWriter) {
  PriceTable t;
  t.assets = {"A", "B"};
  t.dates = business_days("2024-03-01", 4);
  t.prices = (Mat(4, 2) << 100, 50, 100.1, 49.9, 0.1 + 0.2, 1e-7, 123456.789, 3).finished();
  std::ostringstream out;
  write_prices(out, t);
  const auto back = parse(out.str());
  EXPECT_EQ(back.dates, t.dates);
  EXPECT_EQ(back.assets, t.assets);
  EXPECT_EQ(back.prices, t.prices);
}

TEST(BusinessDays, SkipsWeekends) {
  const auto d = business_days("2024-03-01", 4);
  EXPECT_EQ(d, (std::vector<std::string>{"2024-03-01", "2024-03-04", "2024-03-05", "2024-03-06"}));
  EXPECT_EQ(business_days("2024-03-02", 1).front(), "2024-03-04");
  EXPECT_EQ(business_days("2023-12-29", 2).back(), "2024-01-01");
}

TEST(IsoDate, Validation) {
  EXPECT_TRUE(is_iso_date("2024-02-29"));
  EXPECT_FALSE(is_iso_date("2023-02-29"));
  EXPECT_FALSE(is_iso_date("2024-1-05"));
  EXPECT_FALSE(is_iso_date("2024-13-01"));
  EXPECT_FALSE(is_iso_date("20240105"));
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(-2.5e-10), "-2.5e-10");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

}  // namespace
}  // namespace mpcfolio
