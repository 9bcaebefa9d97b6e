#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opencost/codec.hpp"
#include "opencost/model.hpp"
#include "opencost/report.hpp"

namespace opencost {

struct ValidationOptions {
  Date today;                    // reference for the future-date rule
  int invoice_skew_years = 2;    // invoice_date >= publication_date - N years
};

// today = current UTC date
ValidationOptions default_validation_options();

// Semantic rules on valid entities (constructor invariants re-checked too).
ValidationReport validate_record(const PublicationCostRecord& record,
                                 const ValidationOptions& options);
ValidationReport validate_contract(const Contract& contract,
                                   const ValidationOptions& options);

// Record/contract rules plus cross-record rules: dangling contract links,
// duplicate DOIs per institution, contracts whose cost groups match no
// publication at all.
ValidationReport validate_corpus(const Corpus& corpus, const ValidationOptions& options);

// Lenient document-level validation: invariant violations become findings
// instead of throws. Grammar-level problems (malformed bytes, unknown root,
// unsupported version) still throw. `entity` is set when the document binds.
struct DocumentValidation {
  ValidationReport report;
  std::optional<Entity> entity;
};
DocumentValidation validate_document(std::string_view bytes, WireFormat format,
                                     const ValidationOptions& options);

// Validates a set of named documents as one corpus: per-document findings,
// duplicate-id findings, then corpus rules over everything that bound.
// source_id keys the assembled corpus records.
struct CorpusValidation {
  ValidationReport report;
  Corpus corpus;
};
CorpusValidation validate_documents(
    const std::vector<std::pair<std::string, std::string>>& named_documents,
    std::optional<WireFormat> forced_format, const ValidationOptions& options,
    const std::string& source_id = "local");

}  // namespace opencost
