#include "opencost/codec.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "opencost/errors.hpp"
#include "opencost/xml.hpp"

namespace opencost {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& message, std::size_t pos = Error::npos) {
  if (pos == Error::npos) throw Error(ErrorCode::malformed, message);
  throw Error(ErrorCode::malformed, message, pos);
}

// decimal grammar `-?digits(.digits)?`; scientific notation is Malformed,
// oversized scale is left for check_raw.
RawMoney parse_raw_money_text(const std::string& text, const std::string& currency,
                              const std::string& where) {
  RawMoney m;
  m.text = text;
  m.currency = currency;
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') ++i;
  std::size_t int_begin = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == int_begin) malformed(where + ": not a decimal amount: '" + text + "'");
  int frac = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t frac_begin = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == frac_begin) malformed(where + ": dangling decimal point: '" + text + "'");
    frac = static_cast<int>(i - frac_begin);
  }
  if (i != text.size()) {
    malformed(where + ": bad amount syntax (scientific notation is not allowed): '" +
              text + "'");
  }
  m.fraction_digits = frac;
  if (frac <= 4) m.value = Decimal4::parse(text);
  return m;
}

RawDate parse_raw_date_text(const std::string& text, const std::string& where) {
  RawDate d;
  d.text = text;
  auto shaped = Date::parse_shape(text);
  if (!shaped) malformed(where + ": not an ISO 8601 date: '" + text + "'");
  if (shaped->valid()) d.date = *shaped;
  return d;
}

int parse_schema_major(const std::string& version) {
  std::size_t dot = version.find('.');
  std::string major = dot == std::string::npos ? version : version.substr(0, dot);
  if (major.empty()) malformed("bad schema_version '" + version + "'");
  for (char c : major) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      malformed("bad schema_version '" + version + "'");
    }
  }
  return std::stoi(major);
}

void require_supported_version(const std::string& version) {
  if (parse_schema_major(version) > kSchemaMajor) {
    throw Error(ErrorCode::unsupported_version,
                "document schema_version " + version + " is newer than supported " +
                    kSchemaVersion);
  }
}

const std::set<std::string>& record_keys() {
  static const std::set<std::string> keys = {
      "record_id",  "doi",         "title",          "journal_title",
      "issn",       "publisher",   "publication_date", "access_model",
      "institution", "metadata_license", "cost_parts", "contract_links",
      "kind",       "schema_version"};
  return keys;
}

const std::set<std::string>& cost_part_keys() {
  static const std::set<std::string> keys = {"cost_type", "type",  "amount", "vat",
                                             "invoice_date", "payer", "note"};
  return keys;
}

const std::set<std::string>& contract_keys() {
  static const std::set<std::string> keys = {"contract_id", "name",        "contract_kind",
                                             "participants", "cost_groups", "kind",
                                             "schema_version"};
  return keys;
}

const std::set<std::string>& cost_group_keys() {
  static const std::set<std::string> keys = {"group_id", "id",    "period_from",
                                             "period_to", "total", "payer"};
  return keys;
}

void add_extension(Extensions& ext, const std::string& key, std::string value) {
  if (!xml::valid_name(key)) {
    malformed("extension field name '" + key + "' is not usable across formats");
  }
  ext.insert_or_assign(key, std::move(value));
}

// -------------------------------------------------------------------------
// JSON -> raw
// -------------------------------------------------------------------------

std::string json_scalar_text(const ordered_json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean() || v.is_null()) return v.dump();
  malformed(where + ": structured extension values are not supported");
}

std::string require_string(const ordered_json& obj, const char* key,
                           const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) malformed(where + "." + key + " must be a string");
  return v.get<std::string>();
}

RawMoney json_money(const ordered_json& v, const std::string& where) {
  if (!v.is_object()) malformed(where + " must be an object");
  std::string value_text, currency;
  bool have_value = false, have_currency = false;
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (it.key() == "value") {
      if (!it.value().is_string()) {
        malformed(where + ".value must be a decimal string");
      }
      value_text = it.value().get<std::string>();
      have_value = true;
    } else if (it.key() == "currency") {
      if (!it.value().is_string()) malformed(where + ".currency must be a string");
      currency = it.value().get<std::string>();
      have_currency = true;
    } else {
      malformed(where + ": unknown money field '" + it.key() + "'");
    }
  }
  if (!have_value || !have_currency) {
    malformed(where + " needs both 'value' and 'currency'");
  }
  return parse_raw_money_text(value_text, currency, where);
}

RawCostPart json_cost_part(const ordered_json& v, const std::string& where) {
  if (!v.is_object()) malformed(where + " must be an object");
  RawCostPart part;
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string& key = it.key();
    if (key == "cost_type") part.cost_type = require_string(v, "cost_type", where);
    else if (key == "amount") part.amount = json_money(it.value(), where + ".amount");
    else if (key == "vat") part.vat = json_money(it.value(), where + ".vat");
    else if (key == "invoice_date") {
      part.invoice_date =
          parse_raw_date_text(require_string(v, "invoice_date", where), where + ".invoice_date");
    } else if (key == "payer") part.payer = require_string(v, "payer", where);
    else if (key == "note") part.note = require_string(v, "note", where);
    else add_extension(part.extensions, key, json_scalar_text(it.value(), where + "." + key));
  }
  return part;
}

std::vector<std::string> json_string_array(const ordered_json& v, const std::string& where) {
  if (!v.is_array()) malformed(where + " must be an array");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) malformed(where + " items must be strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

RawCostGroup json_cost_group(const ordered_json& v, const std::string& where) {
  if (!v.is_object()) malformed(where + " must be an object");
  RawCostGroup group;
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string& key = it.key();
    if (key == "group_id") group.group_id = require_string(v, "group_id", where);
    else if (key == "period_from") {
      group.period_from =
          parse_raw_date_text(require_string(v, "period_from", where), where + ".period_from");
    } else if (key == "period_to") {
      group.period_to =
          parse_raw_date_text(require_string(v, "period_to", where), where + ".period_to");
    } else if (key == "total") group.total = json_money(it.value(), where + ".total");
    else if (key == "payer") group.payer = require_string(v, "payer", where);
    else add_extension(group.extensions, key, json_scalar_text(it.value(), where + "." + key));
  }
  return group;
}

RawEntity parse_raw_json(std::string_view bytes) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what(),
              e.byte > 0 ? static_cast<std::size_t>(e.byte - 1) : 0);
  }
  if (!doc.is_object()) malformed("document root must be a JSON object");

  auto kind_it = doc.find("kind");
  if (kind_it == doc.end() || !kind_it->is_string()) {
    throw Error(ErrorCode::unknown_root_kind, "document has no 'kind' discriminator");
  }
  std::string kind = kind_it->get<std::string>();
  if (kind != "publication" && kind != "contract") {
    throw Error(ErrorCode::unknown_root_kind, "unknown document kind '" + kind + "'");
  }
  auto version_it = doc.find("schema_version");
  if (version_it == doc.end() || !version_it->is_string()) {
    malformed("document has no schema_version");
  }
  require_supported_version(version_it->get<std::string>());

  RawEntity raw;
  if (kind == "publication") {
    raw.kind = EntityKind::publication;
    RawRecord rec;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string& key = it.key();
      if (key == "kind" || key == "schema_version") continue;
      if (key == "record_id") rec.record_id = require_string(doc, "record_id", "publication");
      else if (key == "doi") rec.doi = require_string(doc, "doi", "publication");
      else if (key == "title") rec.title = require_string(doc, "title", "publication");
      else if (key == "journal_title")
        rec.journal_title = require_string(doc, "journal_title", "publication");
      else if (key == "issn") rec.issn = require_string(doc, "issn", "publication");
      else if (key == "publisher") rec.publisher = require_string(doc, "publisher", "publication");
      else if (key == "publication_date") {
        rec.publication_date = parse_raw_date_text(
            require_string(doc, "publication_date", "publication"), "publication_date");
      } else if (key == "access_model")
        rec.access_model = require_string(doc, "access_model", "publication");
      else if (key == "institution")
        rec.institution = require_string(doc, "institution", "publication");
      else if (key == "metadata_license")
        rec.metadata_license = require_string(doc, "metadata_license", "publication");
      else if (key == "cost_parts") {
        if (!it->is_array()) malformed("cost_parts must be an array");
        std::size_t index = 0;
        for (const auto& item : *it) {
          rec.cost_parts.push_back(
              json_cost_part(item, "cost_parts[" + std::to_string(index++) + "]"));
        }
      } else if (key == "contract_links") {
        rec.contract_links = json_string_array(*it, "contract_links");
      } else {
        add_extension(rec.extensions, key, json_scalar_text(*it, key));
      }
    }
    raw.value = std::move(rec);
  } else {
    raw.kind = EntityKind::contract;
    RawContract con;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string& key = it.key();
      if (key == "kind" || key == "schema_version") continue;
      if (key == "contract_id") con.contract_id = require_string(doc, "contract_id", "contract");
      else if (key == "name") con.name = require_string(doc, "name", "contract");
      else if (key == "contract_kind")
        con.contract_kind = require_string(doc, "contract_kind", "contract");
      else if (key == "participants")
        con.participants = json_string_array(*it, "participants");
      else if (key == "cost_groups") {
        if (!it->is_array()) malformed("cost_groups must be an array");
        std::size_t index = 0;
        for (const auto& item : *it) {
          con.cost_groups.push_back(
              json_cost_group(item, "cost_groups[" + std::to_string(index++) + "]"));
        }
      } else {
        add_extension(con.extensions, key, json_scalar_text(*it, key));
      }
    }
    raw.value = std::move(con);
  }
  return raw;
}

// -------------------------------------------------------------------------
// XML -> raw
// -------------------------------------------------------------------------

std::string element_simple_text(const xml::Element& el, const std::string& where) {
  if (!el.children.empty()) {
    malformed(where + ": unexpected child elements in <" + el.name + ">", el.offset);
  }
  return el.text;
}

RawMoney xml_money(const xml::Element& el, const std::string& where) {
  std::string currency;
  bool have_currency = false;
  for (const auto& [name, value] : el.attributes) {
    if (name == "currency") {
      currency = value;
      have_currency = true;
    } else {
      malformed(where + ": unknown attribute '" + name + "' on <" + el.name + ">",
                el.offset);
    }
  }
  if (!have_currency) malformed(where + ": <" + el.name + "> needs a currency attribute",
                                el.offset);
  return parse_raw_money_text(element_simple_text(el, where), currency, where);
}

void xml_collect_extension(Extensions& ext, const xml::Element& el, const std::string& where) {
  if (!el.children.empty()) {
    malformed(where + ": structured extension element <" + el.name + "> is not supported",
              el.offset);
  }
  add_extension(ext, std::string(el.local_name()), el.text);
}

RawCostPart xml_cost_part(const xml::Element& el, const std::string& where) {
  RawCostPart part;
  for (const auto& [name, value] : el.attributes) {
    if (name == "type") part.cost_type = value;
    else add_extension(part.extensions, name, value);
  }
  for (const auto& child : el.children) {
    std::string local(child.local_name());
    std::string at = where + "." + local;
    if (local == "amount") part.amount = xml_money(child, at);
    else if (local == "vat") part.vat = xml_money(child, at);
    else if (local == "invoice_date")
      part.invoice_date = parse_raw_date_text(element_simple_text(child, at), at);
    else if (local == "payer") part.payer = element_simple_text(child, at);
    else if (local == "note") part.note = element_simple_text(child, at);
    else xml_collect_extension(part.extensions, child, where);
  }
  return part;
}

RawCostGroup xml_cost_group(const xml::Element& el, const std::string& where) {
  RawCostGroup group;
  for (const auto& [name, value] : el.attributes) {
    if (name == "id") group.group_id = value;
    else add_extension(group.extensions, name, value);
  }
  for (const auto& child : el.children) {
    std::string local(child.local_name());
    std::string at = where + "." + local;
    if (local == "period_from")
      group.period_from = parse_raw_date_text(element_simple_text(child, at), at);
    else if (local == "period_to")
      group.period_to = parse_raw_date_text(element_simple_text(child, at), at);
    else if (local == "total") group.total = xml_money(child, at);
    else if (local == "payer") group.payer = element_simple_text(child, at);
    else xml_collect_extension(group.extensions, child, where);
  }
  return group;
}

RawEntity parse_raw_xml(std::string_view bytes) {
  xml::Element root = xml::parse(bytes);
  std::string kind(root.local_name());
  if (kind != "publication" && kind != "contract") {
    throw Error(ErrorCode::unknown_root_kind, "unknown document root <" + kind + ">");
  }
  const std::string* ns = root.attr("xmlns");
  if (!ns || *ns != kSchemaNamespace) {
    malformed("document root must carry xmlns=\"" + std::string(kSchemaNamespace) + "\"",
              root.offset);
  }
  const std::string* version = root.attr("schema_version");
  if (!version) malformed("document root has no schema_version attribute", root.offset);
  require_supported_version(*version);

  RawEntity raw;
  if (kind == "publication") {
    raw.kind = EntityKind::publication;
    RawRecord rec;
    for (const auto& [name, value] : root.attributes) {
      if (name != "xmlns" && name != "schema_version") {
        add_extension(rec.extensions, name, value);
      }
    }
    for (const auto& child : root.children) {
      std::string local(child.local_name());
      if (local == "record_id") rec.record_id = element_simple_text(child, local);
      else if (local == "doi") rec.doi = element_simple_text(child, local);
      else if (local == "title") rec.title = element_simple_text(child, local);
      else if (local == "journal_title") rec.journal_title = element_simple_text(child, local);
      else if (local == "issn") rec.issn = element_simple_text(child, local);
      else if (local == "publisher") rec.publisher = element_simple_text(child, local);
      else if (local == "publication_date")
        rec.publication_date =
            parse_raw_date_text(element_simple_text(child, local), "publication_date");
      else if (local == "access_model") rec.access_model = element_simple_text(child, local);
      else if (local == "institution") rec.institution = element_simple_text(child, local);
      else if (local == "metadata_license")
        rec.metadata_license = element_simple_text(child, local);
      else if (local == "cost_parts") {
        std::size_t index = 0;
        for (const auto& part_el : child.children) {
          if (part_el.local_name() != "cost_part") {
            malformed("cost_parts may only contain <cost_part>", part_el.offset);
          }
          rec.cost_parts.push_back(
              xml_cost_part(part_el, "cost_parts[" + std::to_string(index++) + "]"));
        }
      } else if (local == "contract_links") {
        for (const auto& link_el : child.children) {
          if (link_el.local_name() != "contract_link") {
            malformed("contract_links may only contain <contract_link>", link_el.offset);
          }
          rec.contract_links.push_back(element_simple_text(link_el, "contract_link"));
        }
      } else {
        xml_collect_extension(rec.extensions, child, "publication");
      }
    }
    raw.value = std::move(rec);
  } else {
    raw.kind = EntityKind::contract;
    RawContract con;
    for (const auto& [name, value] : root.attributes) {
      if (name != "xmlns" && name != "schema_version") {
        add_extension(con.extensions, name, value);
      }
    }
    for (const auto& child : root.children) {
      std::string local(child.local_name());
      if (local == "contract_id") con.contract_id = element_simple_text(child, local);
      else if (local == "name") con.name = element_simple_text(child, local);
      else if (local == "contract_kind") con.contract_kind = element_simple_text(child, local);
      else if (local == "participants") {
        for (const auto& part_el : child.children) {
          if (part_el.local_name() != "participant") {
            malformed("participants may only contain <participant>", part_el.offset);
          }
          con.participants.push_back(element_simple_text(part_el, "participant"));
        }
      } else if (local == "cost_groups") {
        std::size_t index = 0;
        for (const auto& group_el : child.children) {
          if (group_el.local_name() != "cost_group") {
            malformed("cost_groups may only contain <cost_group>", group_el.offset);
          }
          con.cost_groups.push_back(
              xml_cost_group(group_el, "cost_groups[" + std::to_string(index++) + "]"));
        }
      } else {
        xml_collect_extension(con.extensions, child, "contract");
      }
    }
    raw.value = std::move(con);
  }
  return raw;
}

// -------------------------------------------------------------------------
// Invariant findings on raw documents
// -------------------------------------------------------------------------

class RawChecker {
 public:
  explicit RawChecker(std::vector<Finding>& out) : out_(out) {}

  void error(std::string code, std::string locus, std::string message) {
    out_.push_back({Severity::error, std::move(code), std::move(locus), std::move(message)});
  }

  void check_money(const std::optional<RawMoney>& money, const std::string& locus,
                   bool required) {
    if (!money) {
      if (required) error("missing_field", locus, "required amount is missing");
      return;
    }
    if (money->fraction_digits > 4) {
      error("bad_scale", locus,
            "more than 4 fraction digits: '" + money->text + "'");
    } else if (money->value && money->value->is_negative()) {
      error("negative_amount", locus, "amount must be >= 0: '" + money->text + "'");
    }
    if (!currency_code_valid(money->currency)) {
      error("bad_currency_code", locus,
            "not an ISO 4217 alpha-3 code: '" + money->currency + "'");
    }
  }

  void check_date(const std::optional<RawDate>& date, const std::string& locus,
                  bool required) {
    if (!date) {
      if (required) error("missing_field", locus, "required date is missing");
      return;
    }
    if (!date->date) error("bad_date", locus, "impossible calendar date: '" + date->text + "'");
  }

  void require(const std::optional<std::string>& field, const std::string& locus) {
    if (!field) error("missing_field", locus, "required field is missing");
  }

  void check_record(const RawRecord& rec) {
    std::string id = rec.record_id.value_or("?");
    auto locus = [&](const std::string& path) { return "publication/" + id + "/" + path; };

    require(rec.record_id, locus("record_id"));
    if (rec.record_id && rec.record_id->empty()) {
      error("empty_record_id", locus("record_id"), "record_id must be non-empty");
    }
    require(rec.title, locus("title"));
    require(rec.journal_title, locus("journal_title"));
    require(rec.publisher, locus("publisher"));
    require(rec.institution, locus("institution"));
    require(rec.metadata_license, locus("metadata_license"));
    check_date(rec.publication_date, locus("publication_date"), true);

    if (!rec.access_model) {
      error("missing_field", locus("access_model"), "required field is missing");
    } else if (!access_model_from_string(*rec.access_model)) {
      error("bad_access_model", locus("access_model"),
            "unknown access model '" + *rec.access_model + "'");
    }
    if (rec.metadata_license && *rec.metadata_license != kMetadataLicense) {
      error("bad_metadata_license", locus("metadata_license"),
            "metadata_license must be '" + std::string(kMetadataLicense) + "', got '" +
                *rec.metadata_license + "'");
    }
    if (rec.issn && !issn_valid(*rec.issn)) {
      error("bad_issn", locus("issn"), "ISSN fails the mod-11 check: '" + *rec.issn + "'");
    }
    if (rec.doi) {
      try {
        std::string normalized = normalize_doi(*rec.doi);
        if (normalized != *rec.doi) {
          error("doi_not_normalized", locus("doi"),
                "doi must be stored normalized ('" + normalized + "')");
        }
      } catch (const Error&) {
        error("malformed_doi", locus("doi"), "not a DOI: '" + *rec.doi + "'");
      }
    }

    Decimal4 apc_total;
    bool apc_total_known = true;
    for (std::size_t i = 0; i < rec.cost_parts.size(); ++i) {
      const auto& part = rec.cost_parts[i];
      std::string base = locus("cost_parts[" + std::to_string(i) + "]");
      if (!part.cost_type) {
        error("missing_field", base + "/cost_type", "required field is missing");
      } else if (!cost_type_from_string(*part.cost_type)) {
        error("bad_cost_type", base + "/cost_type",
              "unknown cost type '" + *part.cost_type + "'");
      } else if (*part.cost_type == "other" && (!part.note || part.note->empty())) {
        error("note_required", base + "/note",
              "cost_type 'other' requires a non-empty note");
      }
      check_money(part.amount, base + "/amount", true);
      check_money(part.vat, base + "/vat", false);
      if (part.vat && part.amount && part.vat->currency != part.amount->currency &&
          currency_code_valid(part.vat->currency) &&
          currency_code_valid(part.amount->currency)) {
        error("vat_currency_mismatch", base + "/vat",
              "vat currency " + part.vat->currency + " differs from amount currency " +
                  part.amount->currency);
      }
      check_date(part.invoice_date, base + "/invoice_date", true);
      require(part.payer, base + "/payer");
      if (part.cost_type && *part.cost_type == "apc") {
        if (part.amount && part.amount->value) apc_total = apc_total + *part.amount->value;
        else apc_total_known = false;
      }
    }
    if (rec.access_model && *rec.access_model == "diamond" && apc_total_known &&
        !apc_total.is_zero()) {
      error("diamond_nonzero_apc", locus("access_model"),
            "diamond access with non-zero apc cost (" + apc_total.str() + ")");
    }
  }

  void check_contract(const RawContract& con) {
    std::string id = con.contract_id.value_or("?");
    auto locus = [&](const std::string& path) { return "contract/" + id + "/" + path; };

    require(con.contract_id, locus("contract_id"));
    if (con.contract_id && con.contract_id->empty()) {
      error("empty_contract_id", locus("contract_id"), "contract_id must be non-empty");
    }
    require(con.name, locus("name"));
    if (!con.contract_kind) {
      error("missing_field", locus("contract_kind"), "required field is missing");
    } else if (!contract_kind_from_string(*con.contract_kind)) {
      error("bad_contract_kind", locus("contract_kind"),
            "unknown contract kind '" + *con.contract_kind + "'");
    }
    if (con.participants.empty()) {
      error("empty_participants", locus("participants"),
            "a contract needs at least one participant");
    }

    std::map<std::string, int> group_ids;
    for (std::size_t i = 0; i < con.cost_groups.size(); ++i) {
      const auto& group = con.cost_groups[i];
      std::string base = locus("cost_groups[" + std::to_string(i) + "]");
      if (!group.group_id) {
        error("missing_field", base + "/group_id", "required field is missing");
      } else if (group.group_id->empty()) {
        error("empty_group_id", base + "/group_id", "group_id must be non-empty");
      } else if (++group_ids[*group.group_id] == 2) {
        error("duplicate_group_id", base + "/group_id",
              "group_id '" + *group.group_id + "' appears more than once");
      }
      check_date(group.period_from, base + "/period_from", true);
      check_date(group.period_to, base + "/period_to", true);
      if (group.period_from && group.period_to && group.period_from->date &&
          group.period_to->date && *group.period_to->date < *group.period_from->date) {
        error("period_inverted", base + "/period_from",
              "period_from " + group.period_from->text + " after period_to " +
                  group.period_to->text);
      }
      check_money(group.total, base + "/total", true);
      require(group.payer, base + "/payer");
    }
    for (std::size_t i = 0; i < con.cost_groups.size(); ++i) {
      for (std::size_t j = i + 1; j < con.cost_groups.size(); ++j) {
        const auto& a = con.cost_groups[i];
        const auto& b = con.cost_groups[j];
        if (!a.payer || !b.payer || *a.payer != *b.payer) continue;
        if (!a.period_from || !a.period_to || !b.period_from || !b.period_to) continue;
        if (!a.period_from->date || !a.period_to->date || !b.period_from->date ||
            !b.period_to->date) {
          continue;
        }
        if (*a.period_from->date <= *b.period_to->date &&
            *b.period_from->date <= *a.period_to->date) {
          error("overlapping_cost_groups", locus("cost_groups[" + std::to_string(j) + "]"),
                "cost groups of payer '" + *a.payer + "' have overlapping periods");
        }
      }
    }
  }

 private:
  std::vector<Finding>& out_;
};

// -------------------------------------------------------------------------
// Binding raw -> typed (pre: no error findings)
// -------------------------------------------------------------------------

Money bind_money(const RawMoney& raw) {
  return Money(*raw.value, raw.currency);
}

Entity bind_raw_impl(const RawEntity& raw) {
  if (raw.kind == EntityKind::publication) {
    const auto& rec = std::get<RawRecord>(raw.value);
    PublicationCostRecord out;
    out.record_id = *rec.record_id;
    out.doi = rec.doi;
    out.title = *rec.title;
    out.journal_title = *rec.journal_title;
    out.issn = rec.issn;
    out.publisher = *rec.publisher;
    out.publication_date = *rec.publication_date->date;
    out.access_model = *access_model_from_string(*rec.access_model);
    out.institution = *rec.institution;
    out.metadata_license = *rec.metadata_license;
    out.contract_links = rec.contract_links;
    out.extensions = rec.extensions;
    for (const auto& part : rec.cost_parts) {
      CostPart p;
      p.cost_type = *cost_type_from_string(*part.cost_type);
      p.amount = bind_money(*part.amount);
      if (part.vat) p.vat = bind_money(*part.vat);
      p.invoice_date = *part.invoice_date->date;
      p.payer = *part.payer;
      p.note = part.note;
      p.extensions = part.extensions;
      out.cost_parts.push_back(std::move(p));
    }
    out.validate();
    return out;
  }
  const auto& con = std::get<RawContract>(raw.value);
  Contract out;
  out.contract_id = *con.contract_id;
  out.name = *con.name;
  out.kind = *contract_kind_from_string(*con.contract_kind);
  out.participants = con.participants;
  out.extensions = con.extensions;
  for (const auto& group : con.cost_groups) {
    CostGroup g;
    g.group_id = *group.group_id;
    g.period_from = *group.period_from->date;
    g.period_to = *group.period_to->date;
    g.total = bind_money(*group.total);
    g.payer = *group.payer;
    g.extensions = group.extensions;
    out.cost_groups.push_back(std::move(g));
  }
  out.validate();
  return out;
}

// -------------------------------------------------------------------------
// Encoding
// -------------------------------------------------------------------------

void guard_extensions(const Extensions& ext, const std::set<std::string>& reserved,
                      const char* where) {
  for (const auto& [key, value] : ext) {
    (void)value;
    if (!xml::valid_name(key)) {
      throw Error(ErrorCode::invariant_violation,
                  std::string(where) + ": extension key '" + key +
                      "' is not a valid field name");
    }
    if (reserved.count(key)) {
      throw Error(ErrorCode::invariant_violation,
                  std::string(where) + ": extension key '" + key +
                      "' collides with a schema field");
    }
  }
}

ordered_json money_json(const Money& money) {
  ordered_json o;
  o["currency"] = money.currency();
  o["value"] = money.amount().str();
  return o;
}

std::string encode_json(const Entity& entity) {
  ordered_json doc;
  if (const auto* rec = std::get_if<PublicationCostRecord>(&entity)) {
    guard_extensions(rec->extensions, record_keys(), "publication");
    doc["access_model"] = to_string(rec->access_model);
    if (!rec->contract_links.empty()) doc["contract_links"] = rec->contract_links;
    if (!rec->cost_parts.empty()) {
      ordered_json parts = ordered_json::array();
      for (const auto& part : rec->cost_parts) {
        guard_extensions(part.extensions, cost_part_keys(), "cost_part");
        ordered_json p;
        p["amount"] = money_json(part.amount);
        p["cost_type"] = to_string(part.cost_type);
        p["invoice_date"] = part.invoice_date.str();
        if (part.note) p["note"] = *part.note;
        p["payer"] = part.payer;
        if (part.vat) p["vat"] = money_json(*part.vat);
        for (const auto& [key, value] : part.extensions) p[key] = value;
        parts.push_back(std::move(p));
      }
      doc["cost_parts"] = std::move(parts);
    }
    if (rec->doi) doc["doi"] = *rec->doi;
    doc["institution"] = rec->institution;
    if (rec->issn) doc["issn"] = *rec->issn;
    doc["journal_title"] = rec->journal_title;
    doc["kind"] = "publication";
    doc["metadata_license"] = rec->metadata_license;
    doc["publication_date"] = rec->publication_date.str();
    doc["publisher"] = rec->publisher;
    doc["record_id"] = rec->record_id;
    doc["schema_version"] = kSchemaVersion;
    doc["title"] = rec->title;
    for (const auto& [key, value] : rec->extensions) doc[key] = value;
  } else {
    const auto& con = std::get<Contract>(entity);
    guard_extensions(con.extensions, contract_keys(), "contract");
    doc["contract_id"] = con.contract_id;
    doc["contract_kind"] = to_string(con.kind);
    if (!con.cost_groups.empty()) {
      ordered_json groups = ordered_json::array();
      for (const auto& group : con.cost_groups) {
        guard_extensions(group.extensions, cost_group_keys(), "cost_group");
        ordered_json g;
        g["group_id"] = group.group_id;
        g["payer"] = group.payer;
        g["period_from"] = group.period_from.str();
        g["period_to"] = group.period_to.str();
        g["total"] = money_json(group.total);
        for (const auto& [key, value] : group.extensions) g[key] = value;
        groups.push_back(std::move(g));
      }
      doc["cost_groups"] = std::move(groups);
    }
    doc["kind"] = "contract";
    doc["name"] = con.name;
    doc["participants"] = con.participants;
    doc["schema_version"] = kSchemaVersion;
    for (const auto& [key, value] : con.extensions) doc[key] = value;
  }
  return doc.dump();
}

xml::Element text_element(std::string name, std::string text) {
  xml::Element el;
  el.name = std::move(name);
  el.text = std::move(text);
  return el;
}

xml::Element money_element(std::string name, const Money& money) {
  xml::Element el = text_element(std::move(name), money.amount().str());
  el.attributes.emplace_back("currency", money.currency());
  return el;
}

std::string encode_xml(const Entity& entity) {
  xml::Element root;
  if (const auto* rec = std::get_if<PublicationCostRecord>(&entity)) {
    guard_extensions(rec->extensions, record_keys(), "publication");
    root.name = "publication";
    root.attributes.emplace_back("xmlns", kSchemaNamespace);
    root.attributes.emplace_back("schema_version", kSchemaVersion);
    root.children.push_back(text_element("record_id", rec->record_id));
    if (rec->doi) root.children.push_back(text_element("doi", *rec->doi));
    root.children.push_back(text_element("title", rec->title));
    root.children.push_back(text_element("journal_title", rec->journal_title));
    if (rec->issn) root.children.push_back(text_element("issn", *rec->issn));
    root.children.push_back(text_element("publisher", rec->publisher));
    root.children.push_back(text_element("publication_date", rec->publication_date.str()));
    root.children.push_back(text_element("access_model", to_string(rec->access_model)));
    root.children.push_back(text_element("institution", rec->institution));
    root.children.push_back(text_element("metadata_license", rec->metadata_license));
    if (!rec->cost_parts.empty()) {
      xml::Element parts;
      parts.name = "cost_parts";
      for (const auto& part : rec->cost_parts) {
        guard_extensions(part.extensions, cost_part_keys(), "cost_part");
        xml::Element p;
        p.name = "cost_part";
        p.attributes.emplace_back("type", to_string(part.cost_type));
        p.children.push_back(money_element("amount", part.amount));
        if (part.vat) p.children.push_back(money_element("vat", *part.vat));
        p.children.push_back(text_element("invoice_date", part.invoice_date.str()));
        p.children.push_back(text_element("payer", part.payer));
        if (part.note) p.children.push_back(text_element("note", *part.note));
        for (const auto& [key, value] : part.extensions) {
          p.children.push_back(text_element(key, value));
        }
        parts.children.push_back(std::move(p));
      }
      root.children.push_back(std::move(parts));
    }
    if (!rec->contract_links.empty()) {
      xml::Element links;
      links.name = "contract_links";
      for (const auto& link : rec->contract_links) {
        links.children.push_back(text_element("contract_link", link));
      }
      root.children.push_back(std::move(links));
    }
    for (const auto& [key, value] : rec->extensions) {
      root.children.push_back(text_element(key, value));
    }
  } else {
    const auto& con = std::get<Contract>(entity);
    guard_extensions(con.extensions, contract_keys(), "contract");
    root.name = "contract";
    root.attributes.emplace_back("xmlns", kSchemaNamespace);
    root.attributes.emplace_back("schema_version", kSchemaVersion);
    root.children.push_back(text_element("contract_id", con.contract_id));
    root.children.push_back(text_element("name", con.name));
    root.children.push_back(text_element("contract_kind", to_string(con.kind)));
    xml::Element participants;
    participants.name = "participants";
    for (const auto& p : con.participants) {
      participants.children.push_back(text_element("participant", p));
    }
    root.children.push_back(std::move(participants));
    if (!con.cost_groups.empty()) {
      xml::Element groups;
      groups.name = "cost_groups";
      for (const auto& group : con.cost_groups) {
        guard_extensions(group.extensions, cost_group_keys(), "cost_group");
        xml::Element g;
        g.name = "cost_group";
        g.attributes.emplace_back("id", group.group_id);
        g.children.push_back(text_element("period_from", group.period_from.str()));
        g.children.push_back(text_element("period_to", group.period_to.str()));
        g.children.push_back(money_element("total", group.total));
        g.children.push_back(text_element("payer", group.payer));
        for (const auto& [key, value] : group.extensions) {
          g.children.push_back(text_element(key, value));
        }
        groups.children.push_back(std::move(g));
      }
      root.children.push_back(std::move(groups));
    }
    for (const auto& [key, value] : con.extensions) {
      root.children.push_back(text_element(key, value));
    }
  }
  return xml::serialize(root);
}

}  // namespace

const char* to_string(WireFormat f) { return f == WireFormat::xml ? "xml" : "json"; }

WireFormat sniff_format(std::string_view bytes) {
  for (char c : bytes) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '<' ? WireFormat::xml : WireFormat::json;
  }
  return WireFormat::json;
}

RawEntity parse_raw(std::string_view bytes, WireFormat format) {
  return format == WireFormat::json ? parse_raw_json(bytes) : parse_raw_xml(bytes);
}

std::vector<Finding> check_raw(const RawEntity& raw) {
  std::vector<Finding> findings;
  RawChecker checker(findings);
  if (raw.kind == EntityKind::publication) {
    checker.check_record(std::get<RawRecord>(raw.value));
  } else {
    checker.check_contract(std::get<RawContract>(raw.value));
  }
  std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    if (a.locus != b.locus) return a.locus < b.locus;
    return a.code < b.code;
  });
  return findings;
}

Entity bind_raw(const RawEntity& raw) { return bind_raw_impl(raw); }

std::string encode(const Entity& entity, WireFormat format) {
  return format == WireFormat::json ? encode_json(entity) : encode_xml(entity);
}

Entity decode(std::string_view bytes, WireFormat format) {
  RawEntity raw = parse_raw(bytes, format);
  std::vector<Finding> findings = check_raw(raw);
  for (const auto& f : findings) {
    if (f.severity == Severity::error) {
      throw Error(ErrorCode::invariant_violation, f.code + " at " + f.locus + ": " + f.message)
          .with_field(f.locus)
          .with_detail(f.code);
    }
  }
  return bind_raw(raw);
}

std::string transcode(std::string_view bytes, WireFormat from, WireFormat to) {
  return encode(decode(bytes, from), to);
}

EntityKind kind_of(const Entity& entity) {
  return std::holds_alternative<PublicationCostRecord>(entity) ? EntityKind::publication
                                                               : EntityKind::contract;
}

const std::string& entity_id(const Entity& entity) {
  if (const auto* rec = std::get_if<PublicationCostRecord>(&entity)) return rec->record_id;
  return std::get<Contract>(entity).contract_id;
}

}  // namespace opencost
