#include <doctest.h>

#include <map>

#include "opencost/aggregate.hpp"
#include "opencost/codec.hpp"
#include "opencost/mockrepo.hpp"

using namespace opencost;

namespace {

RateTable test_rates() {
  return RateTable::parse_csv(
      "currency,valid_from,valid_to,rate_to_eur\n"
      "USD,2020-01-01,2029-12-31,0.9200\n"
      "GBP,2020-01-01,2029-12-31,1.1700\n"
      "CHF,2020-01-01,2029-12-31,1.0400\n");
}

PublicationCostRecord make_record(const std::string& id, const std::string& inst,
                                  const std::string& journal, const char* issn,
                                  const char* apc_eur) {
  PublicationCostRecord rec;
  rec.record_id = id;
  rec.title = "T " + id;
  rec.journal_title = journal;
  if (issn) rec.issn = issn;
  rec.publisher = "Pub";
  rec.publication_date = Date::parse("2024-03-10");
  rec.access_model = AccessModel::gold;
  rec.institution = inst;
  if (apc_eur) {
    CostPart part;
    part.cost_type = CostType::apc;
    part.amount = new_money(apc_eur, "EUR");
    part.invoice_date = Date::parse("2024-02-01");
    part.payer = inst;
    rec.cost_parts.push_back(part);
  }
  return rec;
}

Corpus load_generated(const GeneratedCorpus& generated, const std::string& source) {
  Corpus corpus;
  for (const auto& doc : generated.fixtures) {
    Entity entity = decode(doc.document_json, WireFormat::json);
    if (const auto* rec = std::get_if<PublicationCostRecord>(&entity)) {
      corpus.add_record({source, rec->record_id}, *rec);
    } else {
      corpus.add_contract(std::get<Contract>(entity));
    }
  }
  return corpus;
}

}  // namespace

TEST_CASE("journal averages over small groups") {
  Corpus corpus;
  corpus.add_record({"s", "a"}, make_record("a", "uni-a", "Journal X", "1234-5679", "1000.00"));
  corpus.add_record({"s", "b"}, make_record("b", "uni-a", "Journal X", "1234-5679", "2000.00"));
  corpus.add_record({"s", "c"}, make_record("c", "uni-b", "Solo Journal", nullptr, "500.00"));

  AllocationResult no_alloc;
  auto result = journal_averages(corpus, no_alloc, test_rates());
  REQUIRE(result.rows.size() == 2);
  // sorted by group key: issn groups before title-fallback groups
  const auto& jx = result.rows[0];
  CHECK(jx.issn == "1234-5679");
  CHECK(jx.n_articles == 2);
  CHECK(jx.mean_eur == new_money("1500.00", "EUR"));
  CHECK(jx.median_eur == new_money("1500.00", "EUR"));
  CHECK(jx.min_eur == new_money("1000.00", "EUR"));
  CHECK(jx.max_eur == new_money("2000.00", "EUR"));
  CHECK(jx.scope == "global");

  const auto& solo = result.rows[1];
  CHECK(!solo.issn);
  CHECK(solo.journal_title == "Solo Journal");
  CHECK(solo.n_articles == 1);
  // degenerate group: every statistic equals the single cost
  CHECK(solo.mean_eur == solo.median_eur);
  CHECK(solo.median_eur == solo.min_eur);
  CHECK(solo.min_eur == solo.max_eur);
  CHECK(solo.mean_eur == new_money("500.00", "EUR"));

  SUBCASE("local scope filters by institution") {
    AggregateOptions local;
    local.local_institution = "uni-a";
    auto local_result = journal_averages(corpus, no_alloc, test_rates(), local);
    REQUIRE(local_result.rows.size() == 1);
    CHECK(local_result.rows[0].scope == "local:uni-a");
    CHECK(local_result.rows[0].n_articles == 2);
  }

  SUBCASE("even group median is the half-even mean of the middle pair") {
    corpus.add_record({"s", "d"},
                      make_record("d", "uni-a", "Journal X", "1234-5679", "2000.01"));
    corpus.add_record({"s", "e"},
                      make_record("e", "uni-a", "Journal X", "1234-5679", "3000.00"));
    auto r = journal_averages(corpus, no_alloc, test_rates());
    // costs 1000.00, 2000.00, 2000.01, 3000.00 -> middle pair mean 2000.005
    CHECK(r.rows[0].median_eur == new_money("2000.00", "EUR"));
  }
}

TEST_CASE("records without a usable rate are skipped and tallied") {
  Corpus corpus;
  PublicationCostRecord rec = make_record("x", "uni-a", "J", nullptr, nullptr);
  CostPart part;
  part.cost_type = CostType::apc;
  part.amount = new_money("100.00", "JPY");  // no JPY window in the table
  part.invoice_date = Date::parse("2024-02-01");
  part.payer = "uni-a";
  rec.cost_parts.push_back(part);
  corpus.add_record({"s", "x"}, rec);
  corpus.add_record({"s", "y"}, make_record("y", "uni-a", "J", nullptr, "50.00"));

  AllocationResult no_alloc;
  auto averages = journal_averages(corpus, no_alloc, test_rates());
  REQUIRE(averages.skipped.size() == 1);
  CHECK(averages.skipped[0].key == RecordKey{"s", "x"});
  REQUIRE(averages.rows.size() == 1);
  CHECK(averages.rows[0].n_articles == 1);

  auto report = institution_report(corpus, no_alloc, test_rates());
  CHECK(report.skipped.size() == 1);
  auto exported = export_openapc_csv(corpus, no_alloc, test_rates());
  CHECK(exported.skipped.size() == 1);
}

TEST_CASE("institution report splits categories and stays consistent") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/deal";
  Contract con;
  con.contract_id = cid;
  con.name = "Deal";
  con.kind = ContractKind::transformative_agreement;
  con.participants = {"uni-a"};
  CostGroup g;
  g.group_id = "g";
  g.period_from = Date::parse("2024-01-01");
  g.period_to = Date::parse("2024-12-31");
  g.total = new_money("4000.00", "EUR");
  g.payer = "uni-a";
  con.cost_groups.push_back(g);
  corpus.add_contract(con);

  PublicationCostRecord rec = make_record("m", "uni-a", "J", nullptr, "1500.00");
  rec.contract_links = {cid};
  corpus.add_record({"s", "m"}, rec);

  RateTable rates = test_rates();
  auto allocation = allocate_corpus(corpus, build_link_index(corpus), rates);
  auto report = institution_report(corpus, allocation, rates);
  REQUIRE(report.rows.size() == 2);
  std::map<std::string, Money> by_category;
  for (const auto& row : report.rows) {
    CHECK(row.institution == "uni-a");
    CHECK(row.year == 2024);
    by_category.emplace(row.category, row.total_eur);
  }
  CHECK(by_category.at("apc") == new_money("1500.00", "EUR"));
  CHECK(by_category.at("contract_share") == new_money("4000.00", "EUR"));

  Money total = by_category.at("apc") + by_category.at("contract_share");
  CHECK(total == effective_cost({"s", "m"}, rec, allocation, rates));
}

TEST_CASE("openapc csv golden shape") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/deal";
  Contract con;
  con.contract_id = cid;
  con.name = "Deal";
  con.kind = ContractKind::transformative_agreement;
  con.participants = {"uni-a"};
  CostGroup g;
  g.group_id = "g";
  g.period_from = Date::parse("2024-01-01");
  g.period_to = Date::parse("2024-12-31");
  g.total = new_money("12000.00", "EUR");
  g.payer = "uni-a";
  con.cost_groups.push_back(g);
  corpus.add_contract(con);

  // the hybrid record from the interface contract: 200.00 page charge plus a
  // 4000.00 share = 4200.00
  PublicationCostRecord hybrid = make_record("h", "uni-a", "Journal X", "1234-5679", nullptr);
  hybrid.access_model = AccessModel::hybrid;
  hybrid.doi = "10.1000/xyz";
  CostPart page;
  page.cost_type = CostType::page_charge;
  page.amount = new_money("200.00", "EUR");
  page.invoice_date = Date::parse("2024-02-01");
  page.payer = "uni-a";
  hybrid.cost_parts.push_back(page);
  hybrid.contract_links = {cid};
  corpus.add_record({"s", "h"}, hybrid);

  for (const char* id : {"p", "q"}) {
    PublicationCostRecord rec = make_record(id, "uni-a", "Journal X", "1234-5679", nullptr);
    rec.doi = std::string("10.1000/") + id;
    rec.contract_links = {cid};
    corpus.add_record({"s", id}, rec);
  }
  // a record with a comma in the title and no doi
  PublicationCostRecord quoted =
      make_record("z", "uni-b", "Annals, Applied", nullptr, "99.00");
  quoted.publisher = "Q \"P\" House";
  corpus.add_record({"s", "z"}, quoted);

  RateTable rates = test_rates();
  auto allocation = allocate_corpus(corpus, build_link_index(corpus), rates);
  auto exported = export_openapc_csv(corpus, allocation, rates);

  std::string expected =
      "institution,period,euro,doi,is_hybrid,publisher,journal_full_title,issn\n"
      "uni-a,2024,4000.00,10.1000/p,FALSE,Pub,Journal X,1234-5679\n"
      "uni-a,2024,4000.00,10.1000/q,FALSE,Pub,Journal X,1234-5679\n"
      "uni-a,2024,4200.00,10.1000/xyz,TRUE,Pub,Journal X,1234-5679\n"
      "uni-b,2024,99.00,NA,FALSE,\"Q \"\"P\"\" House\",\"Annals, Applied\",\n";
  CHECK(exported.csv == expected);

  // byte-identical on repeat
  CHECK(export_openapc_csv(corpus, allocation, rates).csv == exported.csv);

  SUBCASE("empty corpus exports the header only") {
    Corpus empty;
    AllocationResult no_alloc;
    CHECK(export_openapc_csv(empty, no_alloc, rates).csv ==
          "institution,period,euro,doi,is_hybrid,publisher,journal_full_title,issn\n");
  }
}

TEST_CASE("flat recomputation oracle over a generated corpus") {
  GeneratedCorpus generated = generate_corpus(42, 5, 120, 6);
  Corpus corpus = load_generated(generated, "gen");
  RateTable rates = RateTable::parse_csv(generated.rates_csv);
  auto index = build_link_index(corpus);
  auto allocation = allocate_corpus(corpus, index, rates);

  // flat per-record effective costs, skipping nothing (rates cover all)
  std::map<RecordKey, std::int64_t> flat_cost;
  for (const auto& [key, rec] : corpus.records()) {
    std::int64_t raw = 0;
    for (const auto& part : rec.cost_parts) {
      raw += rates.to_eur(part.amount, part.invoice_date).amount().raw();
    }
    raw += allocation.share_for(key).amount().raw();
    flat_cost[key] = raw;
  }

  SUBCASE("institution totals match the flat recomputation") {
    auto report = institution_report(corpus, allocation, rates);
    CHECK(report.skipped.empty());
    std::map<std::string, std::int64_t> by_institution;
    for (const auto& row : report.rows) {
      by_institution[row.institution] += row.total_eur.amount().raw();
    }
    std::map<std::string, std::int64_t> expected;
    for (const auto& [key, rec] : corpus.records()) {
      expected[rec.institution] += flat_cost[key];
    }
    CHECK(by_institution == expected);

    std::int64_t report_sum = 0;
    for (const auto& row : report.rows) report_sum += row.total_eur.amount().raw();
    std::int64_t flat_sum = 0;
    for (const auto& [key, raw] : flat_cost) flat_sum += raw;
    CHECK(report_sum == flat_sum);
  }

  SUBCASE("journal averages match a flat recomputation") {
    auto averages = journal_averages(corpus, allocation, rates);
    CHECK(averages.skipped.empty());
    std::map<std::string, std::vector<std::int64_t>> expected_groups;
    for (const auto& [key, rec] : corpus.records()) {
      std::string group_key = rec.issn ? "issn:" + *rec.issn
                                       : "title:" + normalize_journal_title(rec.journal_title);
      expected_groups[group_key].push_back(flat_cost[key]);
    }
    REQUIRE(averages.rows.size() == expected_groups.size());
    for (const auto& row : averages.rows) {
      std::string group_key =
          row.issn ? "issn:" + *row.issn : "title:" + normalize_journal_title(row.journal_title);
      auto& costs = expected_groups.at(group_key);
      std::sort(costs.begin(), costs.end());
      CHECK(row.n_articles == costs.size());
      CHECK(row.min_eur.amount().raw() == costs.front());
      CHECK(row.max_eur.amount().raw() == costs.back());
      std::int64_t sum = 0;
      for (auto v : costs) sum += v;
      CHECK(row.mean_eur.amount().raw() ==
            Decimal4::div_round_half_even(sum, static_cast<std::int64_t>(costs.size()) * 100) *
                100);
    }
  }

  SUBCASE("global equals local on a single-institution corpus") {
    GeneratedCorpus solo = generate_corpus(9, 1, 30, 2);
    Corpus solo_corpus = load_generated(solo, "gen");
    RateTable solo_rates = RateTable::parse_csv(solo.rates_csv);
    auto solo_alloc =
        allocate_corpus(solo_corpus, build_link_index(solo_corpus), solo_rates);
    auto global = journal_averages(solo_corpus, solo_alloc, solo_rates);
    AggregateOptions local;
    local.local_institution = "uni-001";
    auto local_result = journal_averages(solo_corpus, solo_alloc, solo_rates, local);
    REQUIRE(global.rows.size() == local_result.rows.size());
    for (std::size_t i = 0; i < global.rows.size(); ++i) {
      CHECK(global.rows[i].n_articles == local_result.rows[i].n_articles);
      CHECK(global.rows[i].mean_eur == local_result.rows[i].mean_eur);
      CHECK(global.rows[i].median_eur == local_result.rows[i].median_eur);
      CHECK(global.rows[i].min_eur == local_result.rows[i].min_eur);
      CHECK(global.rows[i].max_eur == local_result.rows[i].max_eur);
    }
  }
}

TEST_CASE("normalize_journal_title") {
  CHECK(normalize_journal_title("  The  Journal\tof Tests ") == "the journal of tests");
  CHECK(normalize_journal_title("MiXeD") == "mixed");
  CHECK(normalize_journal_title("") == "");
}
