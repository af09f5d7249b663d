// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_DATES_HPP
#define MADPFI_DATES_HPP

#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "madpfi/errors.hpp"

namespace madpfi {

/// UTC calendar date. Comparison order is chronological.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..days_in_month

  auto operator<=>(const Date&) const = default;

  static bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  }

  static int days_in_month(int y, int m) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30,
                                    31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return kDays[m - 1];
  }

  bool valid() const {
    return month >= 1 && month <= 12 && day >= 1 &&
           day <= days_in_month(year, month);
  }

  /// Days since 1970-01-01 (days_from_civil, Hinnant's algorithm).
  long to_days() const {
    long y = year;
    const int m = month;
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
  }

  static Date from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                static_cast<int>(d)};
  }

  Date plus_days(long n) const { return from_days(to_days() + n); }

  /// Strict "YYYY-MM-DD".
  static Date parse(std::string_view text) {
    auto fail = [&] {
      throw ParseError("invalid date '" + std::string(text) +
                       "' (expected YYYY-MM-DD)");
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
    auto num = [&](std::size_t pos, std::size_t len) {
      int v = 0;
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') fail();
        v = v * 10 + (text[i] - '0');
      }
      return v;
    };
    Date d{num(0, 4), num(5, 2), num(8, 2)};
    if (!d.valid()) fail();
    return d;
  }

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

/// Inclusive [first, last] date interval.
struct DateInterval {
  Date first;
  Date last;

  auto operator<=>(const DateInterval&) const = default;

  bool contains(const Date& d) const { return first <= d && d <= last; }
  long calendar_days() const { return last.to_days() - first.to_days() + 1; }
};

}  // namespace madpfi

#endif  // MADPFI_DATES_HPP
