#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "opencost/allocation.hpp"
#include "opencost/exchange.hpp"
#include "opencost/model.hpp"

namespace opencost {

struct AggregateOptions {
  bool include_vat = false;
  std::optional<std::string> local_institution;  // set = local scope
};

// A record whose costs cannot be converted (missing FX rate) is skipped and
// tallied here; it never silently vanishes from totals.
struct SkippedRecord {
  RecordKey key;
  std::string reason;
};

struct JournalAverage {
  std::optional<std::string> issn;
  std::string journal_title;
  std::string scope;  // "global" or "local:<institution>"
  std::size_t n_articles = 0;
  Money mean_eur;
  Money median_eur;
  Money min_eur;
  Money max_eur;
};

struct JournalAveragesResult {
  std::vector<JournalAverage> rows;
  std::vector<SkippedRecord> skipped;
};

// Groups by ISSN (fallback: normalized journal title), statistics over the
// effective cost of each record, sorted by group key.
JournalAveragesResult journal_averages(const Corpus& corpus,
                                       const AllocationResult& allocation,
                                       const RateTable& rates,
                                       const AggregateOptions& options = {});

struct InstitutionRow {
  std::string institution;
  int year = 0;             // publication year
  std::string category;     // cost_type name or "contract_share"
  Money total_eur;
  std::size_t n = 0;        // cost parts, or records for contract_share
};

struct InstitutionReportResult {
  std::vector<InstitutionRow> rows;
  std::vector<SkippedRecord> skipped;
};

InstitutionReportResult institution_report(const Corpus& corpus,
                                           const AllocationResult& allocation,
                                           const RateTable& rates,
                                           const AggregateOptions& options = {});

struct OpenApcExport {
  std::string csv;  // UTF-8, RFC 4180 quoting, header-first
  std::vector<SkippedRecord> skipped;
};

OpenApcExport export_openapc_csv(const Corpus& corpus, const AllocationResult& allocation,
                                 const RateTable& rates,
                                 const AggregateOptions& options = {});

std::vector<ContractEfficiency> contract_efficiency_report(
    const Corpus& corpus, const AllocationResult& allocation);

// lowercased, whitespace-collapsed journal title (the ISSN fallback key)
std::string normalize_journal_title(std::string_view title);

}  // namespace opencost
