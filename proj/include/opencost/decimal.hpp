#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace opencost {

// Exact decimal with at most four fraction digits, stored as an integer
// count of ten-thousandths. All monetary arithmetic in the toolkit runs on
// this type so that conservation sums hold to the cent with no float noise.
class Decimal4 {
 public:
  static constexpr std::int64_t kScale = 10000;

  constexpr Decimal4() = default;

  static constexpr Decimal4 from_raw(std::int64_t ten_thousandths) {
    Decimal4 d;
    d.raw_ = ten_thousandths;
    return d;
  }

  static constexpr Decimal4 from_cents(std::int64_t cents) {
    return from_raw(cents * 100);
  }

  static constexpr Decimal4 from_whole(std::int64_t units) {
    return from_raw(units * kScale);
  }

  // Accepts `-?digits(.digits)?`; anything else (including scientific
  // notation) throws Malformed. More than four fraction digits throws
  // BadScale even when the trailing digits are zeros.
  static Decimal4 parse(std::string_view text);

  std::int64_t raw() const { return raw_; }
  bool is_negative() const { return raw_ < 0; }
  bool is_zero() const { return raw_ == 0; }

  // Smallest number of fraction digits that represents the value exactly.
  int fraction_digits() const;

  // Canonical text form: minimal fraction digits, padded up to
  // `min_fraction_digits`. Never scientific notation.
  std::string str(int min_fraction_digits = 2) const;

  // Exact cents; throws if the value has sub-cent precision.
  std::int64_t cents_exact() const;

  Decimal4 operator+(Decimal4 other) const;
  Decimal4 operator-(Decimal4 other) const;
  auto operator<=>(const Decimal4&) const = default;

  // this * rate, rounded half-even to two decimals.
  Decimal4 mul_round_cents(Decimal4 rate) const;

  // Half-even rounding of an integer quotient: numerator / denominator with
  // the result scaled as plain integer division would be. Exposed for the
  // cent-level statistics in the aggregate module.
  static std::int64_t div_round_half_even(std::int64_t numerator,
                                          std::int64_t denominator);

 private:
  std::int64_t raw_ = 0;
};

}  // namespace opencost
