#include "opencost/decimal.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>

#include "opencost/errors.hpp"

namespace opencost {

namespace {

constexpr std::int64_t kMaxRaw = std::numeric_limits<std::int64_t>::max();

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorCode::malformed, "decimal overflow");
  }
  return out;
}

}  // namespace

Decimal4 Decimal4::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && text[i] == '-') {
    negative = true;
    ++i;
  }
  std::size_t int_begin = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == int_begin) {
    throw Error(ErrorCode::malformed, "not a decimal number: '" + std::string(text) + "'");
  }
  std::int64_t whole = 0;
  for (std::size_t k = int_begin; k < i; ++k) {
    if (whole > (kMaxRaw - 9) / 10) {
      throw Error(ErrorCode::malformed, "decimal out of range: '" + std::string(text) + "'");
    }
    whole = whole * 10 + (text[k] - '0');
  }
  int frac_digits = 0;
  std::int64_t frac = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t frac_begin = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == frac_begin) {
      throw Error(ErrorCode::malformed, "dangling decimal point: '" + std::string(text) + "'");
    }
    frac_digits = static_cast<int>(i - frac_begin);
    if (frac_digits > 4) {
      throw Error(ErrorCode::bad_scale,
                  "more than 4 fraction digits: '" + std::string(text) + "'");
    }
    for (std::size_t k = frac_begin; k < i; ++k) frac = frac * 10 + (text[k] - '0');
    for (int k = frac_digits; k < 4; ++k) frac *= 10;
  }
  if (i != text.size()) {
    throw Error(ErrorCode::malformed, "trailing characters in decimal: '" + std::string(text) + "'");
  }
  if (whole > (kMaxRaw - frac) / kScale) {
    throw Error(ErrorCode::malformed, "decimal out of range: '" + std::string(text) + "'");
  }
  std::int64_t raw = whole * kScale + frac;
  return from_raw(negative ? -raw : raw);
}

int Decimal4::fraction_digits() const {
  std::int64_t f = (raw_ < 0 ? -raw_ : raw_) % kScale;
  if (f == 0) return 0;
  if (f % 1000 == 0) return 1;
  if (f % 100 == 0) return 2;
  if (f % 10 == 0) return 3;
  return 4;
}

std::string Decimal4::str(int min_fraction_digits) const {
  std::int64_t mag = raw_ < 0 ? -raw_ : raw_;
  std::string out = raw_ < 0 ? "-" : "";
  out += std::to_string(mag / kScale);
  int digits = fraction_digits();
  if (digits < min_fraction_digits) digits = min_fraction_digits;
  if (digits > 0) {
    char buf[5];
    std::snprintf(buf, sizeof buf, "%04lld", static_cast<long long>(mag % kScale));
    out += '.';
    out.append(buf, buf + digits);
  }
  return out;
}

std::int64_t Decimal4::cents_exact() const {
  if (raw_ % 100 != 0) {
    throw Error(ErrorCode::invariant_violation,
                "value has sub-cent precision: " + str());
  }
  return raw_ / 100;
}

Decimal4 Decimal4::operator+(Decimal4 other) const {
  return from_raw(checked_add(raw_, other.raw_));
}

Decimal4 Decimal4::operator-(Decimal4 other) const {
  return from_raw(checked_add(raw_, -other.raw_));
}

Decimal4 Decimal4::mul_round_cents(Decimal4 rate) const {
  __int128 product = static_cast<__int128>(raw_) * rate.raw_;
  // product is scaled 1e8; reduce to cents (1e2) => divide by 1e6 half-even.
  constexpr __int128 divisor = 1000000;
  bool negative = product < 0;
  if (negative) product = -product;
  __int128 q = product / divisor;
  __int128 r = product % divisor;
  constexpr __int128 half = 500000;
  if (r > half || (r == half && (q % 2) == 1)) ++q;
  std::int64_t cents = static_cast<std::int64_t>(q);
  return from_cents(negative ? -cents : cents);
}

std::int64_t Decimal4::div_round_half_even(std::int64_t numerator,
                                           std::int64_t denominator) {
  bool negative = (numerator < 0) != (denominator < 0);
  std::int64_t n = numerator < 0 ? -numerator : numerator;
  std::int64_t d = denominator < 0 ? -denominator : denominator;
  std::int64_t q = n / d;
  std::int64_t r = n % d;
  // compare 2r against d to detect the exact half without overflow concern
  if (r > d - r || (r == d - r && (q % 2) == 1)) ++q;
  return negative ? -q : q;
}

}  // namespace opencost
