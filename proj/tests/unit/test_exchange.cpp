#include <doctest.h>

#include <cstdlib>
#include <random>

#include "opencost/errors.hpp"
#include "opencost/exchange.hpp"

using namespace opencost;

namespace {

RateTable table_with_usd() {
  return RateTable::parse_csv(
      "currency,valid_from,valid_to,rate_to_eur\n"
      "USD,2024-01-01,2024-12-31,0.9000\n"
      "USD,2025-01-01,2025-12-31,0.9500\n"
      "CHF,2024-01-01,2024-06-30,1.0400\n");
}

ErrorCode code_of(const char* csv) {
  try {
    RateTable::parse_csv(csv);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::malformed;
}

}  // namespace

TEST_CASE("csv parsing") {
  RateTable table = table_with_usd();
  CHECK(table.windows().size() == 3);
  CHECK(table.windows()[0].currency == "USD");
  CHECK(table.windows()[0].rate_to_eur == Decimal4::parse("0.9000"));

  CHECK(code_of("money,from,to,rate\nUSD,2024-01-01,2024-12-31,0.9\n") ==
        ErrorCode::bad_header);
  CHECK(code_of("") == ErrorCode::bad_header);
  CHECK(code_of("currency,valid_from,valid_to,rate_to_eur\n"
                "USD,2024-01-01,2024-12-31,0.9\n"
                "USD,2024-06-01,2025-05-31,0.91\n") == ErrorCode::overlapping_windows);
  CHECK(code_of("currency,valid_from,valid_to,rate_to_eur\n"
                "USD,2024-01-01,2024-12-31,0\n") == ErrorCode::non_positive_rate);
  CHECK(code_of("currency,valid_from,valid_to,rate_to_eur\n"
                "EUR,2024-01-01,2024-12-31,1.1\n") == ErrorCode::invariant_violation);
  CHECK(code_of("currency,valid_from,valid_to,rate_to_eur\n"
                "EUR,2024-01-01,2024-12-31,1.0000\n") == ErrorCode::invariant_violation);
  // windows touching exactly at the boundary day overlap
  CHECK(code_of("currency,valid_from,valid_to,rate_to_eur\n"
                "USD,2024-01-01,2024-06-30,0.9\n"
                "USD,2024-06-30,2024-12-31,0.91\n") == ErrorCode::overlapping_windows);
}

TEST_CASE("to_eur") {
  RateTable table = table_with_usd();
  CHECK(table.to_eur(new_money("1000.00", "USD"), Date::parse("2024-06-01")) ==
        new_money("900.00", "EUR"));
  // window selection by date
  CHECK(table.to_eur(new_money("1000.00", "USD"), Date::parse("2025-06-01")) ==
        new_money("950.00", "EUR"));
  // EUR is the identity regardless of any table
  CHECK(table.to_eur(new_money("500.00", "EUR"), Date::parse("1999-01-01")) ==
        new_money("500.00", "EUR"));

  try {
    table.to_eur(new_money("100.00", "CHF"), Date::parse("2024-07-01"));
    FAIL("expected NoRateForDate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_rate_for_date);
    CHECK(e.detail() == "CHF");
  }
  CHECK_THROWS_AS(table.to_eur(new_money("1.00", "JPY"), Date::parse("2024-07-01")),
                  Error);
}

TEST_CASE("to_eur half-even boundaries through a unit rate") {
  RateTable table = RateTable::parse_csv(
      "currency,valid_from,valid_to,rate_to_eur\n"
      "USD,2024-01-01,2024-12-31,1.0000\n");
  Date on = Date::parse("2024-06-01");
  CHECK(table.to_eur(new_money("33.335", "USD"), on) == new_money("33.34", "EUR"));
  CHECK(table.to_eur(new_money("33.345", "USD"), on) == new_money("33.34", "EUR"));
  CHECK(table.to_eur(new_money("33.3451", "USD"), on) == new_money("33.35", "EUR"));
}

TEST_CASE("conversion is scale bounded and nearly additive") {
  RateTable table = table_with_usd();
  Date on = Date::parse("2024-03-03");
  std::mt19937_64 rng(99);
  for (int i = 0; i < 500; ++i) {
    Money a(Decimal4::from_raw(static_cast<std::int64_t>(rng() % 100000000)), "USD");
    Money b(Decimal4::from_raw(static_cast<std::int64_t>(rng() % 100000000)), "USD");
    Money sum_then_convert = table.to_eur(a + b, on);
    Money convert_then_sum = table.to_eur(a, on) + table.to_eur(b, on);
    CHECK(sum_then_convert.amount().fraction_digits() <= 2);
    CHECK(std::llabs(sum_then_convert.amount().raw() - convert_then_sum.amount().raw()) <=
          Decimal4::parse("0.01").raw());
  }
}
