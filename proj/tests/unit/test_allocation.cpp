#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "opencost/allocation.hpp"
#include "opencost/errors.hpp"

using namespace opencost;

namespace {

RateTable unit_rates() {
  return RateTable::parse_csv(
      "currency,valid_from,valid_to,rate_to_eur\n"
      "USD,2020-01-01,2029-12-31,0.9000\n");
}

PublicationCostRecord record_for(const std::string& id, const std::string& institution,
                                 const Date& published) {
  PublicationCostRecord rec;
  rec.record_id = id;
  rec.title = "T " + id;
  rec.journal_title = "J";
  rec.publisher = "P";
  rec.publication_date = published;
  rec.access_model = AccessModel::hybrid;
  rec.institution = institution;
  return rec;
}

Contract contract_with_group(const std::string& id, const std::string& total,
                             int year, std::vector<std::string> participants) {
  Contract con;
  con.contract_id = id;
  con.name = "Deal";
  con.kind = ContractKind::transformative_agreement;
  con.participants = std::move(participants);
  CostGroup g;
  g.group_id = "g-" + std::to_string(year);
  g.period_from = Date{year, 1, 1};
  g.period_to = Date{year, 12, 31};
  g.total = new_money(total, "EUR");
  g.payer = con.participants[0];
  con.cost_groups.push_back(g);
  return con;
}

// Naive oracle: deal the total out one cent at a time, round robin over the
// members in index order. Equivalent definitions must agree exactly.
std::vector<std::int64_t> deal_cents_oracle(std::int64_t total_cents, std::size_t n) {
  std::vector<std::int64_t> shares(n, 0);
  for (std::int64_t c = 0; c < total_cents; ++c) {
    shares[static_cast<std::size_t>(c % static_cast<std::int64_t>(n))] += 1;
  }
  return shares;
}

}  // namespace

TEST_CASE("index membership requires link, period and participation") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/deal";
  corpus.add_contract(contract_with_group(cid, "12000.00", 2024, {"uni-a", "uni-b"}));

  auto in_2024 = Date::parse("2024-05-01");
  auto linked = [&](const std::string& id, const std::string& inst, Date published) {
    PublicationCostRecord rec = record_for(id, inst, published);
    rec.contract_links = {cid};
    corpus.add_record({"src", id}, rec);
  };
  linked("a1", "uni-a", in_2024);
  linked("a2", "uni-b", in_2024);
  linked("a3", "uni-a", in_2024);
  linked("late", "uni-a", Date::parse("2023-06-01"));     // outside the period
  linked("stranger", "uni-x", in_2024);                   // not a participant
  corpus.add_record({"src", "unrelated"},
                    record_for("unrelated", "uni-a", in_2024));  // no link

  ContractLinkIndex index = build_link_index(corpus);
  GroupRef ref{cid, "g-2024"};
  REQUIRE(index.members.count(ref));
  const auto& members = index.members.at(ref);
  REQUIRE(members.size() == 3);
  // deterministic order: (institution, record_id)
  CHECK(members[0] == RecordKey{"src", "a1"});
  CHECK(members[1] == RecordKey{"src", "a3"});
  CHECK(members[2] == RecordKey{"src", "a2"});

  REQUIRE(index.unmatched_links.size() == 2);
  CHECK(index.unmatched_links[0].first.record_id == "late");
  CHECK(index.unmatched_links[1].first.record_id == "stranger");
}

TEST_CASE("dangling links violate the index precondition") {
  Corpus corpus;
  PublicationCostRecord rec = record_for("r", "uni-a", Date::parse("2024-01-01"));
  rec.contract_links = {"https://contracts.example/ghost"};
  corpus.add_record({"src", "r"}, rec);
  try {
    build_link_index(corpus);
    FAIL("expected DanglingLink");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dangling_link);
  }
}

TEST_CASE("equal split with exact division") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/deal";
  corpus.add_contract(contract_with_group(cid, "12000.00", 2024, {"uni-a"}));
  for (const char* id : {"a", "b", "c"}) {
    PublicationCostRecord rec = record_for(id, "uni-a", Date::parse("2024-04-01"));
    rec.contract_links = {cid};
    corpus.add_record({"src", id}, rec);
  }
  auto index = build_link_index(corpus);
  auto result = allocate(*corpus.find_contract(cid), index, unit_rates());
  const auto& alloc = result.groups.at({cid, "g-2024"});
  CHECK(alloc.shares.size() == 3);
  for (const auto& [key, share] : alloc.shares) CHECK(share == new_money("4000.00", "EUR"));
  CHECK(alloc.unallocated.amount().is_zero());
}

TEST_CASE("remainder cents go to the first records in index order") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/deal";
  corpus.add_contract(contract_with_group(cid, "100.00", 2024, {"uni-a"}));
  for (const char* id : {"a", "b", "c"}) {
    PublicationCostRecord rec = record_for(id, "uni-a", Date::parse("2024-04-01"));
    rec.contract_links = {cid};
    corpus.add_record({"src", id}, rec);
  }
  auto index = build_link_index(corpus);
  auto result = allocate(*corpus.find_contract(cid), index, unit_rates());
  const auto& alloc = result.groups.at({cid, "g-2024"});
  CHECK(alloc.shares.at({"src", "a"}) == new_money("33.34", "EUR"));
  CHECK(alloc.shares.at({"src", "b"}) == new_money("33.33", "EUR"));
  CHECK(alloc.shares.at({"src", "c"}) == new_money("33.33", "EUR"));
  Money sum = Money::eur_cents(0);
  for (const auto& [key, share] : alloc.shares) sum = sum + share;
  CHECK(sum == new_money("100.00", "EUR"));
}

TEST_CASE("zero linked articles leaves the total unallocated") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/doaj";
  Contract con = contract_with_group(cid, "5000.00", 2024, {"uni-a"});
  con.kind = ContractKind::infrastructure;
  corpus.add_contract(con);
  auto index = build_link_index(corpus);
  auto result = allocate(*corpus.find_contract(cid), index, unit_rates());
  const auto& alloc = result.groups.at({cid, "g-2024"});
  CHECK(alloc.shares.empty());
  CHECK(alloc.unallocated == new_money("5000.00", "EUR"));
}

TEST_CASE("allocation against the cent-dealing oracle") {
  std::mt19937_64 rng(4242);
  RateTable rates = unit_rates();
  for (int round = 0; round < 200; ++round) {
    std::size_t n = rng() % 18;  // 0..17
    std::int64_t total_cents = static_cast<std::int64_t>(rng() % 100000);

    Corpus corpus;
    const std::string cid = "https://contracts.example/deal";
    Money total(Decimal4::from_cents(total_cents), "EUR");
    Contract con = contract_with_group(cid, total.amount().str(), 2024, {"uni-a"});
    corpus.add_contract(con);
    for (std::size_t i = 0; i < n; ++i) {
      std::string id = "r" + std::to_string(100 + i);
      PublicationCostRecord rec = record_for(id, "uni-a", Date::parse("2024-06-01"));
      rec.contract_links = {cid};
      corpus.add_record({"src", id}, rec);
    }
    auto index = build_link_index(corpus);
    auto result = allocate(*corpus.find_contract(cid), index, rates);
    const auto& alloc = result.groups.at({cid, "g-2024"});

    if (n == 0) {
      CHECK(alloc.unallocated == total);
      continue;
    }
    auto expected = deal_cents_oracle(total_cents, n);
    const auto& members = index.members.at({cid, "g-2024"});
    REQUIRE(members.size() == n);
    std::int64_t sum_cents = 0;
    std::int64_t max_share = 0, min_share = INT64_MAX;
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t got = alloc.shares.at(members[i]).amount().raw() / 100;
      CHECK(got == expected[i]);
      sum_cents += got;
      max_share = std::max(max_share, got);
      min_share = std::min(min_share, got);
    }
    CHECK(sum_cents == total_cents);             // conservation
    CHECK(max_share - min_share <= 1);           // share bound, one cent
    CHECK(alloc.unallocated.amount().is_zero());
  }
}

TEST_CASE("adding an article never increases an existing share") {
  RateTable rates = unit_rates();
  const std::string cid = "https://contracts.example/deal";
  std::map<RecordKey, Money> previous;
  for (std::size_t n = 1; n <= 12; ++n) {
    Corpus corpus;
    corpus.add_contract(contract_with_group(cid, "777.77", 2024, {"uni-a"}));
    for (std::size_t i = 0; i < n; ++i) {
      std::string id = "r" + std::to_string(100 + i);
      PublicationCostRecord rec = record_for(id, "uni-a", Date::parse("2024-06-01"));
      rec.contract_links = {cid};
      corpus.add_record({"src", id}, rec);
    }
    auto result =
        allocate(*corpus.find_contract(cid), build_link_index(corpus), rates);
    const auto& shares = result.groups.at({cid, "g-2024"}).shares;
    for (const auto& [key, share] : previous) {
      CHECK(shares.at(key).amount() <= share.amount());
    }
    previous = shares;
  }
}

TEST_CASE("corpus insertion order does not matter") {
  RateTable rates = unit_rates();
  const std::string cid = "https://contracts.example/deal";
  std::vector<std::string> ids = {"a", "b", "c", "d", "e", "f", "g"};
  auto build = [&](const std::vector<std::string>& order) {
    Corpus corpus;
    corpus.add_contract(contract_with_group(cid, "1234.56", 2024, {"uni-a"}));
    for (const auto& id : order) {
      PublicationCostRecord rec = record_for(id, "uni-a", Date::parse("2024-06-01"));
      rec.contract_links = {cid};
      corpus.add_record({"src", id}, rec);
    }
    return allocate_corpus(corpus, build_link_index(corpus), rates);
  };
  AllocationResult forward = build(ids);
  std::vector<std::string> shuffled = ids;
  std::mt19937_64 rng(5);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(build(shuffled) == forward);
}

TEST_CASE("group totals convert at period_from") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/usd-deal";
  Contract con;
  con.contract_id = cid;
  con.name = "USD Deal";
  con.kind = ContractKind::membership;
  con.participants = {"uni-a"};
  CostGroup g;
  g.group_id = "g";
  g.period_from = Date::parse("2024-01-01");
  g.period_to = Date::parse("2024-12-31");
  g.total = new_money("1000.00", "USD");
  g.payer = "uni-a";
  con.cost_groups.push_back(g);
  corpus.add_contract(con);
  auto result = allocate(con, build_link_index(corpus), unit_rates());
  CHECK(result.groups.at({cid, "g"}).total_eur == new_money("900.00", "EUR"));
}

TEST_CASE("effective cost adds direct parts and shares") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/deal";
  corpus.add_contract(contract_with_group(cid, "12000.00", 2024, {"uni-a"}));

  PublicationCostRecord direct_only = record_for("d", "uni-a", Date::parse("2024-02-01"));
  CostPart apc;
  apc.cost_type = CostType::apc;
  apc.amount = new_money("1500.00", "EUR");
  apc.invoice_date = Date::parse("2024-02-10");
  apc.payer = "uni-a";
  direct_only.cost_parts.push_back(apc);
  corpus.add_record({"src", "d"}, direct_only);

  PublicationCostRecord mixed = record_for("m", "uni-a", Date::parse("2024-03-01"));
  CostPart page;
  page.cost_type = CostType::page_charge;
  page.amount = new_money("200.00", "EUR");
  page.invoice_date = Date::parse("2024-03-10");
  page.payer = "uni-a";
  mixed.cost_parts.push_back(page);
  mixed.contract_links = {cid};
  corpus.add_record({"src", "m"}, mixed);

  PublicationCostRecord share_a = record_for("s1", "uni-a", Date::parse("2024-04-01"));
  share_a.contract_links = {cid};
  corpus.add_record({"src", "s1"}, share_a);
  PublicationCostRecord share_b = record_for("s2", "uni-a", Date::parse("2024-05-01"));
  share_b.contract_links = {cid};
  corpus.add_record({"src", "s2"}, share_b);

  RateTable rates = unit_rates();
  auto allocation = allocate_corpus(corpus, build_link_index(corpus), rates);

  // 3 members share 12000 -> 4000 each
  CHECK(effective_cost({"src", "d"}, direct_only, allocation, rates) ==
        new_money("1500.00", "EUR"));
  CHECK(effective_cost({"src", "m"}, mixed, allocation, rates) ==
        new_money("4200.00", "EUR"));
  CHECK(effective_cost({"src", "s1"}, share_a, allocation, rates) ==
        new_money("4000.00", "EUR"));

  // vat excluded by default, included on demand
  PublicationCostRecord with_vat = direct_only;
  with_vat.cost_parts[0].vat = new_money("105.00", "EUR");
  CHECK(effective_cost({"src", "d"}, with_vat, allocation, rates) ==
        new_money("1500.00", "EUR"));
  CHECK(effective_cost({"src", "d"}, with_vat, allocation, rates, true) ==
        new_money("1605.00", "EUR"));
}

TEST_CASE("contract efficiency") {
  Corpus corpus;
  const std::string cid = "https://contracts.example/deal";
  Contract con;
  con.contract_id = cid;
  con.name = "Deal";
  con.kind = ContractKind::transformative_agreement;
  con.participants = {"uni-a"};
  for (int year : {2023, 2024}) {
    CostGroup g;
    g.group_id = "g-" + std::to_string(year);
    g.period_from = Date{year, 1, 1};
    g.period_to = Date{year, 12, 31};
    g.total = new_money("6000.00", "EUR");
    g.payer = "uni-a";
    con.cost_groups.push_back(g);
  }
  corpus.add_contract(con);
  int serial = 0;
  auto add_linked = [&](int year, int count) {
    for (int i = 0; i < count; ++i) {
      std::string id = "r" + std::to_string(++serial);
      PublicationCostRecord rec = record_for(id, "uni-a", Date{year, 6, 1});
      rec.contract_links = {cid};
      corpus.add_record({"src", id}, rec);
    }
  };
  add_linked(2023, 2);
  add_linked(2024, 4);

  auto allocation = allocate_corpus(corpus, build_link_index(corpus), unit_rates());
  auto efficiency = contract_efficiency(con, allocation);
  CHECK(efficiency.total_eur == new_money("12000.00", "EUR"));
  CHECK(efficiency.n_articles == 6);
  REQUIRE(efficiency.eur_per_article);
  CHECK(*efficiency.eur_per_article == new_money("2000.00", "EUR"));

  // zero articles: total reported, per-article undefined
  Corpus empty_corpus;
  Contract infra = contract_with_group("https://contracts.example/doaj", "5000.00",
                                       2024, {"uni-a"});
  empty_corpus.add_contract(infra);
  auto empty_alloc =
      allocate_corpus(empty_corpus, build_link_index(empty_corpus), unit_rates());
  auto row = contract_efficiency(infra, empty_alloc);
  CHECK(row.total_eur == new_money("5000.00", "EUR"));
  CHECK(row.n_articles == 0);
  CHECK(!row.eur_per_article);
}
