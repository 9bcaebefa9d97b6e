#include "opencost/dates.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

#include "opencost/errors.hpp"

namespace opencost {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

int days_in_month(int year, int month) {
  static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return lengths[month - 1];
}

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::optional<Date> Date::parse_shape(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!all_digits(text.substr(0, 4)) || !all_digits(text.substr(5, 2)) ||
      !all_digits(text.substr(8, 2))) {
    return std::nullopt;
  }
  Date d;
  d.year = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
  d.month = (text[5] - '0') * 10 + (text[6] - '0');
  d.day = (text[8] - '0') * 10 + (text[9] - '0');
  return d;
}

Date Date::parse(std::string_view text) {
  auto d = parse_shape(text);
  if (!d) {
    throw Error(ErrorCode::malformed, "not an ISO 8601 date: '" + std::string(text) + "'");
  }
  if (!d->valid()) {
    throw Error(ErrorCode::invariant_violation,
                "impossible calendar date: '" + std::string(text) + "'");
  }
  return *d;
}

bool Date::valid() const {
  if (month < 1 || month > 12) return false;
  if (day < 1 || day > days_in_month(year, month)) return false;
  return true;
}

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::int64_t Date::days_since_epoch() const { return days_from_civil(year, month, day); }

Date Date::from_days(std::int64_t days) {
  Date d;
  civil_from_days(days, d.year, d.month, d.day);
  return d;
}

Date Date::minus_years(int n) const {
  Date d = *this;
  d.year -= n;
  if (d.month == 2 && d.day == 29 && !d.valid()) d.day = 28;
  return d;
}

std::optional<DateTime> DateTime::try_parse(std::string_view text) {
  if (text.size() == 10) {
    auto d = Date::parse_shape(text);
    if (!d || !d->valid()) return std::nullopt;
    return from_date(*d);
  }
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z') {
    return std::nullopt;
  }
  auto d = Date::parse_shape(text.substr(0, 10));
  if (!d || !d->valid()) return std::nullopt;
  if (!all_digits(text.substr(11, 2)) || !all_digits(text.substr(14, 2)) ||
      !all_digits(text.substr(17, 2))) {
    return std::nullopt;
  }
  int hh = (text[11] - '0') * 10 + (text[12] - '0');
  int mm = (text[14] - '0') * 10 + (text[15] - '0');
  int ss = (text[17] - '0') * 10 + (text[18] - '0');
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  DateTime t;
  t.epoch_seconds = d->days_since_epoch() * 86400 + hh * 3600 + mm * 60 + ss;
  return t;
}

DateTime DateTime::parse(std::string_view text) {
  auto t = try_parse(text);
  if (!t) {
    throw Error(ErrorCode::malformed,
                "not an ISO 8601 UTC datetime: '" + std::string(text) + "'");
  }
  return *t;
}

DateTime DateTime::from_date(const Date& d) {
  DateTime t;
  t.epoch_seconds = d.days_since_epoch() * 86400;
  return t;
}

Date DateTime::date() const {
  std::int64_t days = epoch_seconds / 86400;
  if (epoch_seconds < 0 && epoch_seconds % 86400 != 0) --days;
  return Date::from_days(days);
}

std::string DateTime::str() const {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  Date d = Date::from_days(days);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", d.year, d.month,
                d.day, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
  return buf;
}

DateTime utc_now() {
  DateTime t;
  t.epoch_seconds = std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
  return t;
}

}  // namespace opencost
