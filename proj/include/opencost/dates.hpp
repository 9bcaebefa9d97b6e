#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace opencost {

// Calendar date, ISO 8601 `YYYY-MM-DD`.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  // Throws Malformed for wrong shape and InvariantViolation for an
  // impossible calendar date.
  static Date parse(std::string_view text);

  // Shape check without calendar validation; nullopt when the string is not
  // `dddd-dd-dd` at all.
  static std::optional<Date> parse_shape(std::string_view text);

  bool valid() const;
  std::string str() const;

  // Days since 1970-01-01 (civil calendar).
  std::int64_t days_since_epoch() const;
  static Date from_days(std::int64_t days);

  // Calendar shift used by the invoice-skew rule; Feb 29 clamps to Feb 28.
  Date minus_years(int n) const;

  auto operator<=>(const Date&) const = default;
};

// UTC instant at second granularity, ISO 8601 `YYYY-MM-DDThh:mm:ssZ`.
// OAI-PMH datestamps at day granularity parse as midnight UTC.
struct DateTime {
  std::int64_t epoch_seconds = 0;

  static DateTime parse(std::string_view text);
  static std::optional<DateTime> try_parse(std::string_view text);
  static DateTime from_date(const Date& d);

  Date date() const;
  std::string str() const;

  auto operator<=>(const DateTime&) const = default;
};

// Current wall-clock time truncated to seconds, UTC.
DateTime utc_now();

}  // namespace opencost
