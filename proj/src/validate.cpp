#include "opencost/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "opencost/errors.hpp"

namespace opencost {

namespace {

std::string record_locus(const PublicationCostRecord& rec, const std::string& path) {
  return "publication/" + rec.record_id + "/" + path;
}

std::string contract_locus(const Contract& con, const std::string& path) {
  return "contract/" + con.contract_id + "/" + path;
}

// Typed entities normally satisfy every constructor invariant; this guard
// catches hand-assembled structs that skipped validate().
template <typename T>
void recheck_invariants(const T& entity, const std::string& locus, ValidationReport& out) {
  try {
    entity.validate();
  } catch (const Error& e) {
    out.add(Severity::error, "invariant_violation",
            locus + (e.field().empty() ? "" : "/" + e.field()), e.message());
  }
}

bool group_matches(const Contract& con, const CostGroup& group,
                   const PublicationCostRecord& rec) {
  if (!group.contains(rec.publication_date)) return false;
  if (!con.has_participant(rec.institution)) return false;
  return std::find(rec.contract_links.begin(), rec.contract_links.end(),
                   con.contract_id) != rec.contract_links.end();
}

}  // namespace

ValidationOptions default_validation_options() {
  ValidationOptions options;
  options.today = utc_now().date();
  return options;
}

ValidationReport validate_record(const PublicationCostRecord& rec,
                                 const ValidationOptions& options) {
  ValidationReport report;
  recheck_invariants(rec, "publication/" + rec.record_id, report);

  if (options.today < rec.publication_date) {
    report.add(Severity::warning, "future_publication_date",
               record_locus(rec, "publication_date"),
               "publication_date " + rec.publication_date.str() + " is in the future");
  }
  Date earliest = rec.publication_date.minus_years(options.invoice_skew_years);
  for (std::size_t i = 0; i < rec.cost_parts.size(); ++i) {
    const auto& part = rec.cost_parts[i];
    if (part.invoice_date < earliest) {
      report.add(Severity::warning, "invoice_skew",
                 record_locus(rec, "cost_parts[" + std::to_string(i) + "]/invoice_date"),
                 "invoice_date " + part.invoice_date.str() + " is more than " +
                     std::to_string(options.invoice_skew_years) +
                     " years before publication_date " + rec.publication_date.str());
    }
  }
  if (rec.access_model == AccessModel::hybrid && rec.cost_parts.empty() &&
      rec.contract_links.empty()) {
    report.add(Severity::warning, "uncosted_hybrid", record_locus(rec, "access_model"),
               "hybrid record carries no cost parts and no contract links");
  }
  report.normalize();
  return report;
}

ValidationReport validate_contract(const Contract& con, const ValidationOptions&) {
  ValidationReport report;
  recheck_invariants(con, "contract/" + con.contract_id, report);
  report.normalize();
  return report;
}

ValidationReport validate_corpus(const Corpus& corpus, const ValidationOptions& options) {
  ValidationReport report;
  for (const auto& [key, rec] : corpus.records()) {
    report.merge(validate_record(rec, options));
    for (std::size_t i = 0; i < rec.contract_links.size(); ++i) {
      const std::string& link = rec.contract_links[i];
      if (!corpus.find_contract(link)) {
        report.add(Severity::error, "dangling_contract_link",
                   record_locus(rec, "contract_links[" + std::to_string(i) + "]"),
                   "link target '" + link + "' is not a known contract");
      }
    }
  }

  // duplicate normalized DOI within one institution
  std::map<std::pair<std::string, std::string>, const RecordKey*> seen_dois;
  for (const auto& [key, rec] : corpus.records()) {
    if (!rec.doi) continue;
    auto doi_key = std::make_pair(rec.institution, *rec.doi);
    auto it = seen_dois.find(doi_key);
    if (it == seen_dois.end()) {
      seen_dois.emplace(doi_key, &key);
    } else {
      report.add(Severity::warning, "duplicate_doi", record_locus(rec, "doi"),
                 "doi " + *rec.doi + " already reported by record " +
                     it->second->record_id + " of " + rec.institution);
    }
  }

  for (const auto& [id, con] : corpus.contracts()) {
    report.merge(validate_contract(con, options));
    if (con.cost_groups.empty()) continue;
    bool any_match = false;
    for (const auto& group : con.cost_groups) {
      for (const auto& [key, rec] : corpus.records()) {
        if (group_matches(con, group, rec)) {
          any_match = true;
          break;
        }
      }
      if (any_match) break;
    }
    if (!any_match) {
      report.add(Severity::warning, "unallocated_contract",
                 contract_locus(con, "cost_groups"),
                 "no linked publication falls inside any cost group period");
    }
  }
  report.normalize();
  return report;
}

DocumentValidation validate_document(std::string_view bytes, WireFormat format,
                                     const ValidationOptions& options) {
  DocumentValidation out;
  RawEntity raw = parse_raw(bytes, format);
  out.report.findings = check_raw(raw);
  if (!out.report.has_errors()) {
    out.entity = bind_raw(raw);
    if (const auto* rec = std::get_if<PublicationCostRecord>(&*out.entity)) {
      out.report.merge(validate_record(*rec, options));
    } else {
      out.report.merge(validate_contract(std::get<Contract>(*out.entity), options));
    }
  }
  out.report.normalize();
  return out;
}

CorpusValidation validate_documents(
    const std::vector<std::pair<std::string, std::string>>& named_documents,
    std::optional<WireFormat> forced_format, const ValidationOptions& options,
    const std::string& source_id) {
  CorpusValidation out;
  for (const auto& [name, bytes] : named_documents) {
    WireFormat format = forced_format.value_or(sniff_format(bytes));
    DocumentValidation doc;
    try {
      doc = validate_document(bytes, format, options);
    } catch (const Error& e) {
      throw Error(e.code(), name + ": " + e.message());
    }
    // per-document semantic findings are merged; corpus rules re-run below
    for (auto& finding : doc.report.findings) out.report.findings.push_back(finding);
    if (!doc.entity) continue;
    try {
      if (const auto* rec = std::get_if<PublicationCostRecord>(&*doc.entity)) {
        out.corpus.add_record({source_id, rec->record_id}, *rec);
      } else {
        out.corpus.add_contract(std::get<Contract>(*doc.entity));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::duplicate_key) throw;
      bool is_record = std::holds_alternative<PublicationCostRecord>(*doc.entity);
      out.report.add(Severity::error,
                     is_record ? "duplicate_record_id" : "duplicate_contract_id",
                     (is_record ? "publication/" : "contract/") + entity_id(*doc.entity),
                     name + ": " + e.message());
    }
  }
  // corpus-level rules (record/contract semantics were already collected;
  // avoid duplicating them by only adding the cross-record findings)
  ValidationReport corpus_report = validate_corpus(out.corpus, options);
  for (auto& finding : corpus_report.findings) {
    if (finding.code == "dangling_contract_link" || finding.code == "duplicate_doi" ||
        finding.code == "unallocated_contract") {
      out.report.findings.push_back(std::move(finding));
    }
  }
  out.report.normalize();
  return out;
}

}  // namespace opencost
