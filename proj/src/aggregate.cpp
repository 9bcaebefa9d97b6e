#include "opencost/aggregate.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include "opencost/errors.hpp"

namespace opencost {

namespace {

std::string csv_field(const std::string& value) {
  bool needs_quotes = value.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

Money round_to_cents(const Money& m) {
  std::int64_t cents = Decimal4::div_round_half_even(m.amount().raw(), 100);
  return Money::eur_cents(cents);
}

}  // namespace

std::string normalize_journal_title(std::string_view title) {
  std::string out;
  bool pending_space = false;
  for (char c : title) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

JournalAveragesResult journal_averages(const Corpus& corpus,
                                       const AllocationResult& allocation,
                                       const RateTable& rates,
                                       const AggregateOptions& options) {
  struct Group {
    std::optional<std::string> issn;
    std::string journal_title;
    std::vector<std::int64_t> costs_raw;  // EUR, Decimal4 raw units
  };
  std::map<std::string, Group> groups;
  JournalAveragesResult result;

  for (const auto& [key, rec] : corpus.records()) {
    if (options.local_institution && rec.institution != *options.local_institution) {
      continue;
    }
    Money cost;
    try {
      cost = effective_cost(key, rec, allocation, rates, options.include_vat);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_rate_for_date) throw;
      result.skipped.push_back({key, e.message()});
      continue;
    }
    std::string group_key =
        rec.issn ? "issn:" + *rec.issn : "title:" + normalize_journal_title(rec.journal_title);
    auto [it, inserted] = groups.try_emplace(group_key);
    if (inserted) {
      it->second.issn = rec.issn;
      it->second.journal_title = rec.journal_title;
    }
    it->second.costs_raw.push_back(cost.amount().raw());
  }

  std::string scope = options.local_institution ? "local:" + *options.local_institution
                                                : "global";
  for (auto& [group_key, group] : groups) {
    auto& costs = group.costs_raw;
    std::sort(costs.begin(), costs.end());
    JournalAverage row;
    row.issn = group.issn;
    row.journal_title = group.journal_title;
    row.scope = scope;
    row.n_articles = costs.size();
    std::int64_t sum = 0;
    for (auto v : costs) sum += v;
    row.mean_eur = Money::eur_cents(Decimal4::div_round_half_even(
        sum, static_cast<std::int64_t>(costs.size()) * 100));
    std::size_t n = costs.size();
    std::int64_t median_cents;
    if (n % 2 == 1) {
      median_cents = Decimal4::div_round_half_even(costs[n / 2], 100);
    } else {
      median_cents =
          Decimal4::div_round_half_even(costs[n / 2 - 1] + costs[n / 2], 200);
    }
    row.median_eur = Money::eur_cents(median_cents);
    row.min_eur = Money(Decimal4::from_raw(costs.front()), "EUR");
    row.max_eur = Money(Decimal4::from_raw(costs.back()), "EUR");
    result.rows.push_back(std::move(row));
  }
  return result;
}

InstitutionReportResult institution_report(const Corpus& corpus,
                                           const AllocationResult& allocation,
                                           const RateTable& rates,
                                           const AggregateOptions& options) {
  struct Cell {
    std::int64_t total_raw = 0;
    std::size_t n = 0;
  };
  std::map<std::tuple<std::string, int, std::string>, Cell> cells;
  InstitutionReportResult result;

  for (const auto& [key, rec] : corpus.records()) {
    // convert everything for the record first so a missing rate skips the
    // record as a whole and totals stay consistent with effective costs
    std::vector<std::pair<std::string, std::int64_t>> contributions;
    try {
      for (const auto& part : rec.cost_parts) {
        std::int64_t raw = rates.to_eur(part.amount, part.invoice_date).amount().raw();
        if (options.include_vat && part.vat) {
          raw += rates.to_eur(*part.vat, part.invoice_date).amount().raw();
        }
        contributions.emplace_back(to_string(part.cost_type), raw);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_rate_for_date) throw;
      result.skipped.push_back({key, e.message()});
      continue;
    }
    int year = rec.publication_date.year;
    for (const auto& [category, raw] : contributions) {
      Cell& cell = cells[{rec.institution, year, category}];
      cell.total_raw += raw;
      cell.n += 1;
    }
    Money share = allocation.share_for(key);
    if (!share.amount().is_zero()) {
      Cell& cell = cells[{rec.institution, year, "contract_share"}];
      cell.total_raw += share.amount().raw();
      cell.n += 1;
    }
  }

  for (const auto& [key, cell] : cells) {
    InstitutionRow row;
    row.institution = std::get<0>(key);
    row.year = std::get<1>(key);
    row.category = std::get<2>(key);
    row.total_eur = Money(Decimal4::from_raw(cell.total_raw), "EUR");
    row.n = cell.n;
    result.rows.push_back(std::move(row));
  }
  return result;
}

OpenApcExport export_openapc_csv(const Corpus& corpus, const AllocationResult& allocation,
                                 const RateTable& rates, const AggregateOptions& options) {
  OpenApcExport result;
  struct Row {
    std::string institution;
    std::string doi;
    std::string record_id;
    int year = 0;
    Money euro;
    bool is_hybrid = false;
    std::string publisher, journal, issn;
  };
  std::vector<Row> rows;
  for (const auto& [key, rec] : corpus.records()) {
    Row row;
    try {
      row.euro = effective_cost(key, rec, allocation, rates, options.include_vat);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_rate_for_date) throw;
      result.skipped.push_back({key, e.message()});
      continue;
    }
    row.institution = rec.institution;
    row.doi = rec.doi.value_or("NA");
    row.record_id = rec.record_id;
    row.year = rec.publication_date.year;
    row.is_hybrid = rec.access_model == AccessModel::hybrid;
    row.publisher = rec.publisher;
    row.journal = rec.journal_title;
    row.issn = rec.issn.value_or("");
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.institution != b.institution) return a.institution < b.institution;
    if (a.doi != b.doi) return a.doi < b.doi;
    return a.record_id < b.record_id;
  });

  std::string csv = "institution,period,euro,doi,is_hybrid,publisher,journal_full_title,issn\n";
  for (const auto& row : rows) {
    csv += csv_field(row.institution);
    csv += ',';
    csv += std::to_string(row.year);
    csv += ',';
    csv += round_to_cents(row.euro).amount().str();
    csv += ',';
    csv += csv_field(row.doi);
    csv += ',';
    csv += row.is_hybrid ? "TRUE" : "FALSE";
    csv += ',';
    csv += csv_field(row.publisher);
    csv += ',';
    csv += csv_field(row.journal);
    csv += ',';
    csv += csv_field(row.issn);
    csv += '\n';
  }
  result.csv = std::move(csv);
  return result;
}

std::vector<ContractEfficiency> contract_efficiency_report(
    const Corpus& corpus, const AllocationResult& allocation) {
  std::vector<ContractEfficiency> rows;
  for (const auto& [id, contract] : corpus.contracts()) {
    rows.push_back(contract_efficiency(contract, allocation));
  }
  return rows;
}

}  // namespace opencost
