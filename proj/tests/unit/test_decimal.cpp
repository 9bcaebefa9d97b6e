#include <doctest.h>

#include <random>
#include <vector>

#include "opencost/decimal.hpp"
#include "opencost/errors.hpp"

using opencost::Decimal4;
using opencost::Error;
using opencost::ErrorCode;

TEST_CASE("parse and canonical text") {
  CHECK(Decimal4::parse("1500.00").str() == "1500.00");
  CHECK(Decimal4::parse("1500").str() == "1500.00");
  CHECK(Decimal4::parse("1500.0000").str() == "1500.00");
  CHECK(Decimal4::parse("0").str() == "0.00");
  CHECK(Decimal4::parse("33.335").str() == "33.335");
  CHECK(Decimal4::parse("0.1234").str() == "0.1234");
  CHECK(Decimal4::parse("7.10").str() == "7.10");
  CHECK(Decimal4::parse("-5").str() == "-5.00");
  CHECK(Decimal4::parse("0.9000").str(4) == "0.9000");

  CHECK(Decimal4::parse("1500.0000") == Decimal4::parse("1500"));
  CHECK(Decimal4::parse("33.335").fraction_digits() == 3);
  CHECK(Decimal4::parse("10").fraction_digits() == 0);
}

TEST_CASE("parse rejections") {
  CHECK_THROWS_WITH_AS(Decimal4::parse("1.5e3"), doctest::Contains("Malformed"), Error);
  CHECK_THROWS_AS(Decimal4::parse(""), Error);
  CHECK_THROWS_AS(Decimal4::parse("."), Error);
  CHECK_THROWS_AS(Decimal4::parse("5."), Error);
  CHECK_THROWS_AS(Decimal4::parse(".5"), Error);
  CHECK_THROWS_AS(Decimal4::parse("+5"), Error);
  CHECK_THROWS_AS(Decimal4::parse("1,5"), Error);
  CHECK_THROWS_AS(Decimal4::parse("12345678901234567890"), Error);

  try {
    Decimal4::parse("1.23456");
    FAIL("expected BadScale");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::bad_scale);
  }
  // trailing zeros past four places still violate the scale bound
  CHECK_THROWS_AS(Decimal4::parse("1.00000"), Error);
}

// Hand-computed half-even boundary table. Each row: amount, rate, expected
// EUR cents. The boundary sits at exactly half a cent after the multiply.
TEST_CASE("multiply with half-even rounding to cents") {
  struct Row {
    const char* amount;
    const char* rate;
    std::int64_t cents;
  };
  const std::vector<Row> rows = {
      {"1000.00", "0.9000", 90000},  // exact
      {"500.00", "1.0000", 50000},   // identity
      {"33.335", "1.0000", 3334},    // .33|5 -> odd cent, up
      {"33.345", "1.0000", 3334},    // .34|5 -> even cent, stays
      {"33.3449", "1.0000", 3334},   // below half, down
      {"33.3450", "1.0000", 3334},   // exact half, even stays
      {"33.3451", "1.0000", 3335},   // above half, up
      {"0.005", "1.0000", 0},        // 0 even
      {"0.015", "1.0000", 2},        // 1 odd -> 2
      {"0.025", "1.0000", 2},        // 2 even -> 2
      {"2.675", "1.0000", 268},      // 7 odd -> up
      {"1.01", "0.5000", 50},        // 0.505 -> 0.50
      {"1.03", "0.5000", 52},        // 0.515 -> 0.52
      {"100.00", "0.3333", 3333},    // exact at 4 digits
      {"0.0001", "0.0001", 0},       // vanishing product
  };
  for (const auto& row : rows) {
    CAPTURE(row.amount);
    CAPTURE(row.rate);
    auto got = Decimal4::parse(row.amount).mul_round_cents(Decimal4::parse(row.rate));
    CHECK(got == Decimal4::from_cents(row.cents));
    CHECK(got.fraction_digits() <= 2);
  }
}

TEST_CASE("integer division with half-even rounding") {
  CHECK(Decimal4::div_round_half_even(5, 2) == 2);
  CHECK(Decimal4::div_round_half_even(7, 2) == 4);
  CHECK(Decimal4::div_round_half_even(3, 2) == 2);
  CHECK(Decimal4::div_round_half_even(1, 2) == 0);
  CHECK(Decimal4::div_round_half_even(10, 3) == 3);
  CHECK(Decimal4::div_round_half_even(11, 3) == 4);
  CHECK(Decimal4::div_round_half_even(12000 * 100, 3) == 400000);
}

TEST_CASE("sum is order independent") {
  std::mt19937_64 rng(7);
  std::vector<Decimal4> values;
  for (int i = 0; i < 200; ++i) {
    values.push_back(Decimal4::from_raw(static_cast<std::int64_t>(rng() % 10000000)));
  }
  Decimal4 forward;
  for (const auto& v : values) forward = forward + v;
  Decimal4 backward;
  for (auto it = values.rbegin(); it != values.rend(); ++it) backward = backward + *it;
  CHECK(forward == backward);
}
