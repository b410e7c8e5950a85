#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "techval/core/common.hpp"

namespace techval {

/// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;

  static Date from_ymd(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw ParseError("invalid calendar date");
    return Date(sys_days{ymd}.time_since_epoch().count());
  }

  /// Parses "YYYY-MM-DD".
  static Date parse(std::string_view s) {
    s = trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
      throw ParseError("expected ISO-8601 date YYYY-MM-DD, got '" + std::string(s) + "'");
    }
    try {
      const auto y = static_cast<int>(parse_int(s.substr(0, 4)));
      const auto m = static_cast<unsigned>(parse_int(s.substr(5, 2)));
      const auto d = static_cast<unsigned>(parse_int(s.substr(8, 2)));
      return from_ymd(y, m, d);
    } catch (const ParseError&) {
      throw ParseError("invalid date '" + std::string(s) + "'");
    }
  }

  static constexpr Date from_days(int days) noexcept { return Date(days); }

  int days() const noexcept { return days_; }

  Date plus_days(int n) const noexcept { return Date(days_ + n); }

  int year() const {
    using namespace std::chrono;
    return static_cast<int>(year_month_day{sys_days{std::chrono::days{days_}}}.year());
  }

  std::string to_string() const {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{std::chrono::days{days_}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  friend int operator-(Date a, Date b) noexcept { return a.days_ - b.days_; }
  friend auto operator<=>(Date, Date) = default;

 private:
  explicit constexpr Date(int days) : days_(days) {}
  int days_ = 0;
};

}  // namespace techval
