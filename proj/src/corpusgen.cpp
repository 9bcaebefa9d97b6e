#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "opencost/codec.hpp"
#include "opencost/errors.hpp"
#include "opencost/mockrepo.hpp"
#include "opencost/model.hpp"

namespace opencost {

namespace {

// All randomness goes through pick()/chance() on mt19937_64 so the output
// is identical on every platform.
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  std::uint64_t pick(std::uint64_t n) { return n == 0 ? 0 : engine() % n; }
  bool chance(unsigned percent) { return pick(100) < percent; }
  std::int64_t cents_between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(pick(static_cast<std::uint64_t>(hi - lo + 1)));
  }
};

std::string zero_pad(std::uint64_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*llu", width, static_cast<unsigned long long>(value));
  return buf;
}

char issn_check_digit(const std::string& seven) {
  int sum = 0;
  for (int i = 0; i < 7; ++i) sum += (seven[i] - '0') * (8 - i);
  int check = (11 - sum % 11) % 11;
  return check == 10 ? 'X' : static_cast<char>('0' + check);
}

const char* kJournalAdjectives[] = {"Applied", "Theoretical", "European",
                                    "International", "Computational", "Annals of"};
const char* kJournalNouns[] = {"Metadata Studies", "Library Science", "Cost Research",
                               "Open Science", "Repository Engineering",
                               "Scholarly Communication"};
const char* kPublishers[] = {"Aurora Press", "Birch & Field", "Cantor, Wills and Holt",
                             "Delta Academic", "Ems Verlag", "Fjord Publishing"};
const char* kCurrencies[] = {"EUR", "EUR", "EUR", "EUR", "EUR", "EUR",
                             "USD", "USD", "GBP", "CHF"};

struct Journal {
  std::string title;
  std::optional<std::string> issn;
  std::string publisher;
};

constexpr const char* kRatesCsv =
    "currency,valid_from,valid_to,rate_to_eur\n"
    "CHF,2020-01-01,2029-12-31,1.0400\n"
    "GBP,2020-01-01,2029-12-31,1.1700\n"
    "USD,2020-01-01,2029-12-31,0.9200\n";

}  // namespace

GeneratedCorpus generate_corpus(std::uint64_t seed, int n_institutions, int n_records,
                                int n_contracts) {
  if (n_institutions < 1) {
    throw Error(ErrorCode::bad_config, "need at least one institution");
  }
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::string> institutions;
  institutions.reserve(n_institutions);
  for (int i = 0; i < n_institutions; ++i) {
    institutions.push_back("uni-" + zero_pad(i + 1, 3));
  }

  int n_journals = std::max(1, n_records / 15);
  std::vector<Journal> journals;
  journals.reserve(n_journals);
  for (int i = 0; i < n_journals; ++i) {
    Journal j;
    j.title = std::string(kJournalAdjectives[rng.pick(6)]) + " " +
              kJournalNouns[rng.pick(6)] + ", Series " + zero_pad(i + 1, 3);
    if (!rng.chance(12)) {
      std::string seven = zero_pad(1000000 + rng.pick(8999999), 7);
      j.issn = seven.substr(0, 4) + "-" + seven.substr(4) + issn_check_digit(seven);
    }
    j.publisher = kPublishers[rng.pick(6)];
    journals.push_back(std::move(j));
  }

  std::vector<Contract> contracts;
  std::map<std::string, std::vector<std::size_t>> contracts_by_institution;
  for (int i = 0; i < n_contracts; ++i) {
    Contract con;
    con.contract_id = "https://contracts.example/" + std::to_string(seed) + "-" +
                      zero_pad(i + 1, 3);
    con.name = "Agreement " + zero_pad(i + 1, 3);
    con.kind = static_cast<ContractKind>(rng.pick(4));
    std::set<std::string> chosen;
    std::size_t wanted = 1 + rng.pick(std::min<std::uint64_t>(6, n_institutions));
    while (chosen.size() < wanted) {
      chosen.insert(institutions[rng.pick(institutions.size())]);
    }
    con.participants.assign(chosen.begin(), chosen.end());
    int groups = static_cast<int>(rng.pick(4));  // 0..3, zero = announced only
    for (int g = 0; g < groups; ++g) {
      CostGroup group;
      group.group_id = "g-" + std::to_string(2022 + g);
      group.period_from = Date{2022 + g, 1, 1};
      group.period_to = Date{2022 + g, 12, 31};
      group.total = Money(Decimal4::from_cents(rng.cents_between(500000, 5000000)),
                          kCurrencies[rng.pick(10)]);
      group.payer = con.participants[0];
      con.cost_groups.push_back(std::move(group));
    }
    con.validate();
    // records never link the first contract when there are several, so the
    // zero-publication contract case always occurs in larger corpora
    if (!(n_contracts >= 2 && i == 0)) {
      for (const auto& participant : con.participants) {
        contracts_by_institution[participant].push_back(contracts.size());
      }
    }
    contracts.push_back(std::move(con));
  }

  GeneratedCorpus out;
  out.rates_csv = kRatesCsv;

  DateTime base_stamp = DateTime::parse("2024-06-01T00:00:00Z");
  for (int i = 0; i < n_records; ++i) {
    PublicationCostRecord rec;
    rec.record_id = "r" + std::to_string(seed) + "-" + zero_pad(i + 1, 6);
    rec.institution = institutions[rng.pick(institutions.size())];
    const Journal& journal = journals[rng.pick(journals.size())];
    rec.journal_title = journal.title;
    rec.issn = journal.issn;
    rec.publisher = journal.publisher;
    rec.title = "Findings in " + journal.title + ", part " + std::to_string(i + 1) +
                (rng.chance(10) ? ", with commas, for CSV quoting" : "");
    if (rng.chance(85)) {
      rec.doi = "10." + std::to_string(4000 + rng.pick(6000)) + "/oc." +
                std::to_string(seed) + "." + std::to_string(i + 1);
    }
    rec.publication_date =
        Date::from_days(Date{2022, 1, 1}.days_since_epoch() +
                        static_cast<std::int64_t>(rng.pick(1096)));
    unsigned access_roll = static_cast<unsigned>(rng.pick(100));
    rec.access_model = access_roll < 35   ? AccessModel::gold
                       : access_roll < 65 ? AccessModel::hybrid
                       : access_roll < 80 ? AccessModel::diamond
                                          : AccessModel::closed;

    auto add_part = [&](CostType type, std::int64_t lo, std::int64_t hi) {
      CostPart part;
      part.cost_type = type;
      part.amount = Money(Decimal4::from_cents(rng.cents_between(lo, hi)),
                          kCurrencies[rng.pick(10)]);
      if (rng.chance(20)) {
        std::int64_t vat_cents = part.amount.amount().raw() / 100 * 19 / 100;
        part.vat = Money(Decimal4::from_cents(vat_cents), part.amount.currency());
      }
      std::int64_t offset = static_cast<std::int64_t>(rng.pick(120)) - 60;
      part.invoice_date =
          Date::from_days(rec.publication_date.days_since_epoch() + offset);
      part.payer = rec.institution;
      if (type == CostType::other) part.note = "miscellaneous production fee";
      rec.cost_parts.push_back(std::move(part));
    };

    switch (rec.access_model) {
      case AccessModel::gold:
        add_part(CostType::apc, 80000, 350000);
        if (rng.chance(15)) add_part(CostType::submission_fee, 5000, 30000);
        break;
      case AccessModel::hybrid:
        if (rng.chance(70)) add_part(CostType::apc, 150000, 420000);
        if (rng.chance(20)) add_part(CostType::colour_charge, 10000, 60000);
        break;
      case AccessModel::diamond:
        if (rng.chance(25)) add_part(CostType::other, 2000, 20000);
        break;
      case AccessModel::closed:
        add_part(CostType::page_charge, 12000, 90000);
        if (rng.chance(30)) add_part(CostType::colour_charge, 8000, 45000);
        break;
    }

    auto linkable = contracts_by_institution.find(rec.institution);
    if (linkable != contracts_by_institution.end() && rng.chance(40)) {
      std::size_t how_many = 1 + rng.pick(std::min<std::size_t>(2, linkable->second.size()));
      std::set<std::size_t> chosen;
      while (chosen.size() < how_many) {
        chosen.insert(linkable->second[rng.pick(linkable->second.size())]);
      }
      for (std::size_t idx : chosen) {
        rec.contract_links.push_back(contracts[idx].contract_id);
      }
    }
    if (rng.chance(8)) rec.extensions["local_field"] = "annotation " + std::to_string(i);

    rec.validate();
    FixtureDoc doc;
    doc.identifier = "oai:mock:" + rec.record_id;
    doc.datestamp = DateTime{base_stamp.epoch_seconds + i * 7};
    doc.document_json = encode(rec, WireFormat::json);
    out.fixtures.push_back(std::move(doc));
  }

  for (std::size_t i = 0; i < contracts.size(); ++i) {
    FixtureDoc doc;
    doc.identifier = "oai:mock:contract:" + zero_pad(i + 1, 3);
    doc.datestamp = DateTime{base_stamp.epoch_seconds +
                             static_cast<std::int64_t>(n_records + i) * 7};
    doc.document_json = encode(contracts[i], WireFormat::json);
    out.fixtures.push_back(std::move(doc));
  }
  return out;
}

void write_corpus_files(const GeneratedCorpus& corpus,
                        const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::io_error,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }
  save_fixture_corpus(corpus.fixtures, out_dir / "corpus.jsonl");
  std::ofstream rates(out_dir / "rates.csv", std::ios::binary | std::ios::trunc);
  if (!rates) {
    throw Error(ErrorCode::io_error, "cannot write " + (out_dir / "rates.csv").string());
  }
  rates << corpus.rates_csv;
}

}  // namespace opencost
