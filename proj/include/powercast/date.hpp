// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <string>

#include "powercast/error.hpp"

namespace powercast {

constexpr bool is_leap_year(int y) noexcept {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

// Plain civil date. Only ordering, day stepping, and the day-of-year slot are
// needed; anything fancier belongs to a calendar library this tool can skip.
struct Date {
  int year = 2000;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;
};

inline int days_in_month(int year, int month) {
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

inline void validate_date(const Date& d) {
  require(d.month >= 1 && d.month <= 12, "month out of range: " + std::to_string(d.month));
  require(d.day >= 1 && d.day <= days_in_month(d.year, d.month),
          "day out of range: " + std::to_string(d.day));
}

// Climatology slot in 0..364. Feb 29 shares Feb 28's slot so every year maps
// onto the same 365 entries.
inline int day_of_year_index(const Date& d) {
  static constexpr int kCum[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  validate_date(d);
  if (d.month == 2 && d.day == 29) return 58;
  return kCum[d.month - 1] + d.day - 1;
}

inline Date next_day(Date d) {
  validate_date(d);
  if (d.day < days_in_month(d.year, d.month)) {
    ++d.day;
  } else if (d.month < 12) {
    ++d.month;
    d.day = 1;
  } else {
    ++d.year;
    d.month = 1;
    d.day = 1;
  }
  return d;
}

inline Date add_days(Date d, int n) {
  for (int i = 0; i < n; ++i) d = next_day(d);
  return d;
}

inline std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

inline Date parse_date(const std::string& s) {
  Date d;
  int got = std::sscanf(s.c_str(), "%d-%d-%d", &d.year, &d.month, &d.day);
  require(got == 3, "expected date as YYYY-MM-DD, got '" + s + "'");
  validate_date(d);
  return d;
}

}  // namespace powercast
