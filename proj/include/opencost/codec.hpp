#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "opencost/model.hpp"
#include "opencost/report.hpp"

namespace opencost {

enum class WireFormat { xml, json };
enum class EntityKind { publication, contract };

const char* to_string(WireFormat f);

inline constexpr const char* kSchemaNamespace = "https://opencost.example/ns/1.0";
inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr int kSchemaMajor = 1;

struct WireDocument {
  WireFormat format = WireFormat::json;
  std::string body;
};

// First non-space byte decides: '<' is XML, anything else JSON.
WireFormat sniff_format(std::string_view bytes);

// ---------------------------------------------------------------------------
// Raw layer: the wire shape after grammar checks but before invariant
// checks. parse_raw throws Malformed / UnknownRootKind / UnsupportedVersion;
// everything representable here is a structurally sound document whose
// invariant violations surface as findings from check_raw.
// ---------------------------------------------------------------------------

struct RawMoney {
  std::string text;                // grammar-checked decimal literal
  std::string currency;
  std::optional<Decimal4> value;   // unset when more than 4 fraction digits
  int fraction_digits = 0;
};

struct RawDate {
  std::string text;                // shape-checked dddd-dd-dd
  std::optional<Date> date;        // unset when calendar-impossible
};

struct RawCostPart {
  std::optional<std::string> cost_type;
  std::optional<RawMoney> amount;
  std::optional<RawMoney> vat;
  std::optional<RawDate> invoice_date;
  std::optional<std::string> payer;
  std::optional<std::string> note;
  Extensions extensions;
};

struct RawRecord {
  std::optional<std::string> record_id;
  std::optional<std::string> doi;
  std::optional<std::string> title;
  std::optional<std::string> journal_title;
  std::optional<std::string> issn;
  std::optional<std::string> publisher;
  std::optional<RawDate> publication_date;
  std::optional<std::string> access_model;
  std::optional<std::string> institution;
  std::optional<std::string> metadata_license;
  std::vector<RawCostPart> cost_parts;
  std::vector<std::string> contract_links;
  Extensions extensions;
};

struct RawCostGroup {
  std::optional<std::string> group_id;
  std::optional<RawDate> period_from;
  std::optional<RawDate> period_to;
  std::optional<RawMoney> total;
  std::optional<std::string> payer;
  Extensions extensions;
};

struct RawContract {
  std::optional<std::string> contract_id;
  std::optional<std::string> name;
  std::optional<std::string> contract_kind;
  std::vector<std::string> participants;
  std::vector<RawCostGroup> cost_groups;
  Extensions extensions;
};

struct RawEntity {
  EntityKind kind = EntityKind::publication;
  std::variant<RawRecord, RawContract> value;
};

RawEntity parse_raw(std::string_view bytes, WireFormat format);

// Every core-model invariant expressible on the wire, as error findings.
std::vector<Finding> check_raw(const RawEntity& raw);

// Pre: check_raw(raw) is empty.
Entity bind_raw(const RawEntity& raw);

// ---------------------------------------------------------------------------
// Public codec surface
// ---------------------------------------------------------------------------

// Deterministic canonical bytes; identical entities yield identical output.
std::string encode(const Entity& entity, WireFormat format);

// Throws Malformed / UnknownRootKind / UnsupportedVersion /
// InvariantViolation (first error finding, field attached).
Entity decode(std::string_view bytes, WireFormat format);

std::string transcode(std::string_view bytes, WireFormat from, WireFormat to);

EntityKind kind_of(const Entity& entity);
const std::string& entity_id(const Entity& entity);

}  // namespace opencost
