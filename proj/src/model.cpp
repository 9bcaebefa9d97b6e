#include "opencost/model.hpp"

#include <algorithm>
#include <cctype>

#include "opencost/errors.hpp"

namespace opencost {

namespace {

bool is_lower_hex_or_more(char c) {
  // DOI suffix: any printable non-space character.
  return c > 0x20 && c != 0x7f;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool strip_prefix_ci(std::string& s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  s.erase(0, prefix.size());
  return true;
}

}  // namespace

bool currency_code_valid(std::string_view code) {
  if (code.size() != 3) return false;
  for (char c : code) {
    if (c < 'A' || c > 'Z') return false;
  }
  return true;
}

Money::Money(Decimal4 amount, std::string currency)
    : amount_(amount), currency_(std::move(currency)) {
  if (amount_.is_negative()) {
    throw Error(ErrorCode::negative_amount, "amount must be >= 0, got " + amount_.str());
  }
  if (!currency_code_valid(currency_)) {
    throw Error(ErrorCode::bad_currency_code, "not an ISO 4217 alpha-3 code: '" + currency_ + "'");
  }
}

Money Money::eur_cents(std::int64_t cents) {
  return Money(Decimal4::from_cents(cents), "EUR");
}

Money Money::operator+(const Money& other) const {
  if (currency_ != other.currency_) {
    throw Error(ErrorCode::invariant_violation,
                "cannot add " + currency_ + " and " + other.currency_);
  }
  return Money(amount_ + other.amount_, currency_);
}

Money new_money(std::string_view amount, std::string_view currency) {
  return Money(Decimal4::parse(amount), std::string(currency));
}

std::string normalize_doi(std::string_view raw) {
  std::string s(raw);
  // trim surrounding whitespace
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  strip_prefix_ci(s, "https://doi.org/") || strip_prefix_ci(s, "http://doi.org/") ||
      strip_prefix_ci(s, "https://dx.doi.org/") || strip_prefix_ci(s, "http://dx.doi.org/") ||
      strip_prefix_ci(s, "doi:");
  s = lowercase(s);
  // shape: 10.<digits(.digits)*>/<non-empty suffix>
  if (s.size() < 7 || s.compare(0, 3, "10.") != 0) {
    throw Error(ErrorCode::malformed_doi, "not a DOI: '" + std::string(raw) + "'");
  }
  std::size_t slash = s.find('/');
  if (slash == std::string::npos || slash + 1 == s.size()) {
    throw Error(ErrorCode::malformed_doi, "missing DOI suffix: '" + std::string(raw) + "'");
  }
  std::string_view registrant(s.data() + 3, slash - 3);
  if (registrant.empty()) {
    throw Error(ErrorCode::malformed_doi, "empty DOI registrant: '" + std::string(raw) + "'");
  }
  bool prev_dot = true;
  for (char c : registrant) {
    if (c == '.') {
      if (prev_dot) {
        throw Error(ErrorCode::malformed_doi, "bad DOI registrant: '" + std::string(raw) + "'");
      }
      prev_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      prev_dot = false;
    } else {
      throw Error(ErrorCode::malformed_doi, "bad DOI registrant: '" + std::string(raw) + "'");
    }
  }
  if (prev_dot) {
    throw Error(ErrorCode::malformed_doi, "bad DOI registrant: '" + std::string(raw) + "'");
  }
  for (std::size_t i = slash + 1; i < s.size(); ++i) {
    if (!is_lower_hex_or_more(s[i])) {
      throw Error(ErrorCode::malformed_doi, "bad DOI suffix: '" + std::string(raw) + "'");
    }
  }
  return s;
}

bool issn_valid(std::string_view issn) {
  if (issn.size() != 9 || issn[4] != '-') return false;
  int sum = 0;
  int weight = 8;
  for (std::size_t i = 0; i < 9; ++i) {
    if (i == 4) continue;
    char c = issn[i];
    if (weight > 1) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
      sum += (c - '0') * weight;
      --weight;
    } else {
      int check = (11 - sum % 11) % 11;
      if (check == 10) return c == 'X';
      return c == '0' + check;
    }
  }
  return false;
}

const char* to_string(CostType t) {
  switch (t) {
    case CostType::apc: return "apc";
    case CostType::colour_charge: return "colour_charge";
    case CostType::cover_charge: return "cover_charge";
    case CostType::page_charge: return "page_charge";
    case CostType::submission_fee: return "submission_fee";
    case CostType::reprint: return "reprint";
    case CostType::other: return "other";
  }
  return "?";
}

const char* to_string(AccessModel m) {
  switch (m) {
    case AccessModel::gold: return "gold";
    case AccessModel::hybrid: return "hybrid";
    case AccessModel::diamond: return "diamond";
    case AccessModel::closed: return "closed";
  }
  return "?";
}

const char* to_string(ContractKind k) {
  switch (k) {
    case ContractKind::transformative_agreement: return "transformative_agreement";
    case ContractKind::membership: return "membership";
    case ContractKind::diamond_support: return "diamond_support";
    case ContractKind::infrastructure: return "infrastructure";
  }
  return "?";
}

std::optional<CostType> cost_type_from_string(std::string_view s) {
  for (auto t : {CostType::apc, CostType::colour_charge, CostType::cover_charge,
                 CostType::page_charge, CostType::submission_fee, CostType::reprint,
                 CostType::other}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

std::optional<AccessModel> access_model_from_string(std::string_view s) {
  for (auto m : {AccessModel::gold, AccessModel::hybrid, AccessModel::diamond,
                 AccessModel::closed}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<ContractKind> contract_kind_from_string(std::string_view s) {
  for (auto k : {ContractKind::transformative_agreement, ContractKind::membership,
                 ContractKind::diamond_support, ContractKind::infrastructure}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

void CostPart::validate() const {
  if (vat && vat->currency() != amount.currency()) {
    throw Error(ErrorCode::invariant_violation,
                "vat currency " + vat->currency() + " differs from amount currency " +
                    amount.currency())
        .with_field("vat");
  }
  if (cost_type == CostType::other && (!note || note->empty())) {
    throw Error(ErrorCode::invariant_violation,
                "cost_type 'other' requires a non-empty note")
        .with_field("note");
  }
  if (!invoice_date.valid()) {
    throw Error(ErrorCode::invariant_violation, "impossible invoice_date")
        .with_field("invoice_date");
  }
}

Decimal4 PublicationCostRecord::apc_direct_total() const {
  Decimal4 sum;
  for (const auto& part : cost_parts) {
    if (part.cost_type == CostType::apc) sum = sum + part.amount.amount();
  }
  return sum;
}

void PublicationCostRecord::validate() const {
  if (record_id.empty()) {
    throw Error(ErrorCode::invariant_violation, "record_id must be non-empty")
        .with_field("record_id");
  }
  if (issn && !issn_valid(*issn)) {
    throw Error(ErrorCode::invariant_violation, "bad ISSN check digit: '" + *issn + "'")
        .with_field("issn");
  }
  if (doi) {
    // must already be in normalized form
    if (normalize_doi(*doi) != *doi) {
      throw Error(ErrorCode::invariant_violation, "doi not normalized: '" + *doi + "'")
          .with_field("doi");
    }
  }
  if (!publication_date.valid()) {
    throw Error(ErrorCode::invariant_violation, "impossible publication_date")
        .with_field("publication_date");
  }
  if (metadata_license != kMetadataLicense) {
    throw Error(ErrorCode::invariant_violation,
                "metadata_license must be '" + std::string(kMetadataLicense) + "'")
        .with_field("metadata_license");
  }
  for (const auto& part : cost_parts) part.validate();
  if (access_model == AccessModel::diamond && !apc_direct_total().is_zero()) {
    throw Error(ErrorCode::invariant_violation,
                "diamond record carries a non-zero apc cost part")
        .with_field("access_model");
  }
}

void CostGroup::validate() const {
  if (group_id.empty()) {
    throw Error(ErrorCode::invariant_violation, "group_id must be non-empty")
        .with_field("group_id");
  }
  if (!period_from.valid() || !period_to.valid()) {
    throw Error(ErrorCode::invariant_violation, "impossible cost group period")
        .with_field("period_from");
  }
  if (period_to < period_from) {
    throw Error(ErrorCode::invariant_violation,
                "period_from " + period_from.str() + " after period_to " + period_to.str())
        .with_field("period_from");
  }
}

void Contract::validate() const {
  if (contract_id.empty()) {
    throw Error(ErrorCode::invariant_violation, "contract_id must be non-empty")
        .with_field("contract_id");
  }
  if (participants.empty()) {
    throw Error(ErrorCode::invariant_violation, "participants must be non-empty")
        .with_field("participants");
  }
  std::map<std::string, int> seen_groups;
  for (const auto& group : cost_groups) {
    group.validate();
    if (++seen_groups[group.group_id] > 1) {
      throw Error(ErrorCode::invariant_violation,
                  "duplicate group_id '" + group.group_id + "'")
          .with_field("cost_groups");
    }
  }
  // same payer => non-overlapping periods
  for (std::size_t i = 0; i < cost_groups.size(); ++i) {
    for (std::size_t j = i + 1; j < cost_groups.size(); ++j) {
      const auto& a = cost_groups[i];
      const auto& b = cost_groups[j];
      if (a.payer != b.payer) continue;
      if (a.period_from <= b.period_to && b.period_from <= a.period_to) {
        throw Error(ErrorCode::invariant_violation,
                    "cost groups '" + a.group_id + "' and '" + b.group_id +
                        "' of payer '" + a.payer + "' overlap")
            .with_field("cost_groups");
      }
    }
  }
}

bool Contract::has_participant(std::string_view institution) const {
  return std::find(participants.begin(), participants.end(), institution) !=
         participants.end();
}

void Corpus::add_record(RecordKey key, PublicationCostRecord record) {
  auto [it, inserted] = records_.emplace(std::move(key), std::move(record));
  if (!inserted) {
    throw Error(ErrorCode::duplicate_key, "duplicate record key " + it->first.str());
  }
}

void Corpus::add_contract(Contract contract) {
  std::string id = contract.contract_id;
  auto [it, inserted] = contracts_.emplace(std::move(id), std::move(contract));
  if (!inserted) {
    throw Error(ErrorCode::duplicate_key, "duplicate contract_id " + it->first);
  }
}

const Contract* Corpus::find_contract(std::string_view contract_id) const {
  auto it = contracts_.find(std::string(contract_id));
  return it == contracts_.end() ? nullptr : &it->second;
}

}  // namespace opencost
