#include "opencost/exchange.hpp"

#include <fstream>
#include <sstream>

#include "opencost/errors.hpp"

namespace opencost {

namespace {

constexpr const char* kHeader = "currency,valid_from,valid_to,rate_to_eur";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

void RateTable::add(RateWindow window) {
  if (!currency_code_valid(window.currency)) {
    throw Error(ErrorCode::bad_currency_code,
                "rate table currency '" + window.currency + "'");
  }
  if (window.currency == "EUR") {
    throw Error(ErrorCode::invariant_violation,
                "EUR is the reference currency; its rate is fixed at 1 and may not be listed");
  }
  if (window.rate_to_eur <= Decimal4()) {
    throw Error(ErrorCode::non_positive_rate,
                "rate for " + window.currency + " must be > 0, got " +
                    window.rate_to_eur.str(4));
  }
  if (window.valid_to < window.valid_from) {
    throw Error(ErrorCode::invariant_violation,
                "rate window for " + window.currency + " ends before it starts");
  }
  for (const auto& existing : windows_) {
    if (existing.currency != window.currency) continue;
    if (existing.valid_from <= window.valid_to && window.valid_from <= existing.valid_to) {
      throw Error(ErrorCode::overlapping_windows,
                  "overlapping validity windows for " + window.currency + " (" +
                      existing.valid_from.str() + ".." + existing.valid_to.str() +
                      " vs " + window.valid_from.str() + ".." + window.valid_to.str() + ")");
    }
  }
  windows_.push_back(std::move(window));
}

RateTable RateTable::parse_csv(std::string_view text) {
  RateTable table;
  std::stringstream ss{std::string(text)};
  std::string line;
  bool saw_header = false;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      if (line != kHeader) {
        throw Error(ErrorCode::bad_header,
                    "rate table header must be exactly '" + std::string(kHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw Error(ErrorCode::malformed,
                  "rate table line " + std::to_string(line_no) + ": expected 4 fields");
    }
    RateWindow window;
    window.currency = fields[0];
    window.valid_from = Date::parse(fields[1]);
    window.valid_to = Date::parse(fields[2]);
    window.rate_to_eur = Decimal4::parse(fields[3]);
    table.add(std::move(window));
  }
  if (!saw_header) {
    throw Error(ErrorCode::bad_header, "rate table is empty, header line required");
  }
  return table;
}

RateTable RateTable::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open rate table '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

Money RateTable::to_eur(const Money& money, const Date& on) const {
  if (money.currency() == "EUR") return money;
  for (const auto& window : windows_) {
    if (window.currency == money.currency() && window.valid_from <= on &&
        on <= window.valid_to) {
      return Money(money.amount().mul_round_cents(window.rate_to_eur), "EUR");
    }
  }
  throw Error(ErrorCode::no_rate_for_date,
              "no " + money.currency() + " rate covering " + on.str())
      .with_detail(money.currency());
}

}  // namespace opencost
