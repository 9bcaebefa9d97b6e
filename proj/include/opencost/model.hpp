#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "opencost/dates.hpp"
#include "opencost/decimal.hpp"

namespace opencost {

// Unknown wire fields preserved through decode/encode, keyed by field name.
using Extensions = std::map<std::string, std::string>;

// Non-negative exact amount in one ISO 4217 currency. Construction enforces
// both invariants; values are immutable afterwards.
class Money {
 public:
  Money() : amount_(), currency_("EUR") {}
  Money(Decimal4 amount, std::string currency);

  static Money eur_cents(std::int64_t cents);

  const Decimal4& amount() const { return amount_; }
  const std::string& currency() const { return currency_; }
  std::string str() const { return amount_.str(); }

  // Same-currency sum; exact.
  Money operator+(const Money& other) const;
  auto operator<=>(const Money&) const = default;

 private:
  Decimal4 amount_;
  std::string currency_;
};

// new_money("1500.00", "EUR"); throws NegativeAmount / BadCurrencyCode /
// BadScale / Malformed.
Money new_money(std::string_view amount, std::string_view currency);

bool currency_code_valid(std::string_view code);

// Strips resolver prefixes, lowercases, checks the 10.<registrant>/<suffix>
// shape. Throws MalformedDoi. Idempotent on accepted input.
std::string normalize_doi(std::string_view raw);

// ISSN `dddd-dddX` with mod-11 check digit.
bool issn_valid(std::string_view issn);

enum class CostType {
  apc,
  colour_charge,
  cover_charge,
  page_charge,
  submission_fee,
  reprint,
  other,
};

enum class AccessModel { gold, hybrid, diamond, closed };

enum class ContractKind {
  transformative_agreement,
  membership,
  diamond_support,
  infrastructure,
};

const char* to_string(CostType t);
const char* to_string(AccessModel m);
const char* to_string(ContractKind k);
std::optional<CostType> cost_type_from_string(std::string_view s);
std::optional<AccessModel> access_model_from_string(std::string_view s);
std::optional<ContractKind> contract_kind_from_string(std::string_view s);

struct CostPart {
  CostType cost_type = CostType::apc;
  Money amount;
  std::optional<Money> vat;
  Date invoice_date;
  std::string payer;
  std::optional<std::string> note;
  Extensions extensions;

  // Throws InvariantViolation; used by every producer of CostPart values.
  void validate() const;
  bool operator==(const CostPart&) const = default;
};

inline constexpr const char* kMetadataLicense = "CC0-1.0";

struct PublicationCostRecord {
  std::string record_id;
  std::optional<std::string> doi;  // already normalized
  std::string title;
  std::string journal_title;
  std::optional<std::string> issn;
  std::string publisher;
  Date publication_date;
  AccessModel access_model = AccessModel::gold;
  std::string institution;
  std::vector<CostPart> cost_parts;
  std::vector<std::string> contract_links;
  std::string metadata_license = kMetadataLicense;
  Extensions extensions;

  void validate() const;
  // Sum of apc-type direct costs, in raw decimal units (currency-blind;
  // used for the diamond rule where only zero matters).
  Decimal4 apc_direct_total() const;
  bool operator==(const PublicationCostRecord&) const = default;
};

struct CostGroup {
  std::string group_id;
  Date period_from;
  Date period_to;
  Money total;
  std::string payer;
  Extensions extensions;

  void validate() const;
  bool contains(const Date& d) const { return period_from <= d && d <= period_to; }
  bool operator==(const CostGroup&) const = default;
};

struct Contract {
  std::string contract_id;
  std::string name;
  ContractKind kind = ContractKind::transformative_agreement;
  std::vector<std::string> participants;
  std::vector<CostGroup> cost_groups;
  Extensions extensions;

  void validate() const;
  bool has_participant(std::string_view institution) const;
  bool operator==(const Contract&) const = default;
};

struct RecordKey {
  std::string source_id;
  std::string record_id;
  auto operator<=>(const RecordKey&) const = default;
  std::string str() const { return source_id + "/" + record_id; }
};

// Keyed collections of records and contracts; insertion rejects duplicates.
class Corpus {
 public:
  void add_record(RecordKey key, PublicationCostRecord record);
  void add_contract(Contract contract);

  const std::map<RecordKey, PublicationCostRecord>& records() const { return records_; }
  const std::map<std::string, Contract>& contracts() const { return contracts_; }

  const Contract* find_contract(std::string_view contract_id) const;
  bool empty() const { return records_.empty() && contracts_.empty(); }

 private:
  std::map<RecordKey, PublicationCostRecord> records_;
  std::map<std::string, Contract> contracts_;
};

using Entity = std::variant<PublicationCostRecord, Contract>;

}  // namespace opencost
