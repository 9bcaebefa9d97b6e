#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "opencost/dates.hpp"
#include "opencost/decimal.hpp"
#include "opencost/model.hpp"

namespace opencost {

struct RateWindow {
  std::string currency;
  Date valid_from;
  Date valid_to;
  Decimal4 rate_to_eur;
};

// Dated conversion rates into the reference currency. Windows per currency
// must not overlap; EUR is pinned at 1 and may not appear in the table.
class RateTable {
 public:
  void add(RateWindow window);

  // CSV with the exact header `currency,valid_from,valid_to,rate_to_eur`.
  static RateTable parse_csv(std::string_view text);
  static RateTable load_csv(const std::string& path);

  // Conversion at the window containing `on`, rounded half-even to cents.
  // EUR input is returned unchanged. Throws NoRateForDate.
  Money to_eur(const Money& money, const Date& on) const;

  const std::vector<RateWindow>& windows() const { return windows_; }
  bool empty() const { return windows_.empty(); }

 private:
  std::vector<RateWindow> windows_;
};

}  // namespace opencost
