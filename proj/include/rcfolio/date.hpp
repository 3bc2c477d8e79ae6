#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rcfolio {

using Date = std::chrono::year_month_day;

// Strict YYYY-MM-DD. Throws Error(ParseError) on anything else.
Date parse_date(std::string_view text);

std::string format_date(const Date& date);

// `count` consecutive Monday-to-Friday dates starting at the first weekday >= start.
std::vector<Date> business_days(Date start, std::size_t count);

inline bool same_month(const Date& a, const Date& b) {
  return a.year() == b.year() && a.month() == b.month();
}

}  // namespace rcfolio
