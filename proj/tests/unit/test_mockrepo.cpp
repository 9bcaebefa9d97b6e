#include <doctest.h>

#include <fstream>
#include <set>

#include <httplib.h>

#include "opencost/codec.hpp"
#include "opencost/errors.hpp"
#include "opencost/harvest.hpp"
#include "opencost/mockrepo.hpp"
#include "opencost/validate.hpp"
#include "opencost/xml.hpp"

using namespace opencost;

namespace {

std::string get_body(int port, const std::string& path) {
  httplib::Client client("http://127.0.0.1:" + std::to_string(port));
  auto res = client.Get(path);
  REQUIRE(res);
  return res->body;
}

ValidationOptions options_2026() {
  ValidationOptions options;
  options.today = Date::parse("2026-08-10");
  return options;
}

}  // namespace

TEST_CASE("generated corpora are deterministic and valid") {
  GeneratedCorpus a = generate_corpus(42, 3, 40, 4);
  GeneratedCorpus b = generate_corpus(42, 3, 40, 4);
  REQUIRE(a.fixtures.size() == b.fixtures.size());
  for (std::size_t i = 0; i < a.fixtures.size(); ++i) {
    CHECK(a.fixtures[i].identifier == b.fixtures[i].identifier);
    CHECK(a.fixtures[i].datestamp == b.fixtures[i].datestamp);
    CHECK(a.fixtures[i].document_json == b.fixtures[i].document_json);
  }
  CHECK(a.rates_csv == b.rates_csv);
  // a different seed diverges
  GeneratedCorpus c = generate_corpus(43, 3, 40, 4);
  CHECK(a.fixtures[0].document_json != c.fixtures[0].document_json);

  // every generated document decodes, and the corpus carries zero errors
  Corpus corpus;
  for (const auto& doc : a.fixtures) {
    Entity entity = decode(doc.document_json, WireFormat::json);
    if (const auto* rec = std::get_if<PublicationCostRecord>(&entity)) {
      corpus.add_record({"gen", rec->record_id}, *rec);
    } else {
      corpus.add_contract(std::get<Contract>(entity));
    }
  }
  auto report = validate_corpus(corpus, options_2026());
  CHECK(report.error_count() == 0);
}

TEST_CASE("fixture corpus files round trip") {
  GeneratedCorpus generated = generate_corpus(7, 2, 10, 1);
  auto dir = std::filesystem::temp_directory_path() / "opencost-fixture-test";
  std::filesystem::remove_all(dir);
  write_corpus_files(generated, dir);
  auto loaded = load_fixture_corpus(dir / "corpus.jsonl");
  REQUIRE(loaded.size() == generated.fixtures.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].identifier == generated.fixtures[i].identifier);
    CHECK(loaded[i].document_json == generated.fixtures[i].document_json);
  }
  // writing again is byte-identical
  auto first = dir / "corpus.jsonl";
  std::ifstream in(first, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  write_corpus_files(generated, dir);
  std::ifstream in2(first, std::ios::binary);
  std::string bytes2((std::istreambuf_iterator<char>(in2)), {});
  CHECK(bytes == bytes2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("pagination arithmetic") {
  GeneratedCorpus generated = generate_corpus(3, 2, 25, 0);
  MockConfig config;
  config.page_size = 10;
  MockRepo repo(config, generated.fixtures);
  repo.start();

  std::string page1 = get_body(
      repo.port(), "/oai?verb=ListRecords&metadataPrefix=openCost");
  OaiPage p1 = parse_oai_response(page1);
  CHECK(p1.records.size() == 10);
  REQUIRE(p1.resumption_token);
  CHECK(p1.complete_list_size == 25);

  std::string page2 = get_body(repo.port(), "/oai?verb=ListRecords&resumptionToken=" +
                                                *p1.resumption_token);
  OaiPage p2 = parse_oai_response(page2);
  CHECK(p2.records.size() == 10);
  REQUIRE(p2.resumption_token);

  std::string page3 = get_body(repo.port(), "/oai?verb=ListRecords&resumptionToken=" +
                                                *p2.resumption_token);
  OaiPage p3 = parse_oai_response(page3);
  CHECK(p3.records.size() == 5);
  CHECK(!p3.resumption_token);  // empty element on the final page
  repo.stop();
}

TEST_CASE("from and until filter on datestamps") {
  GeneratedCorpus generated = generate_corpus(3, 2, 20, 0);
  MockConfig config;
  config.page_size = 100;
  MockRepo repo(config, generated.fixtures);
  repo.start();

  // datestamps step 7 seconds from 2024-06-01T00:00:00Z; take fixtures 5..9
  std::string from = DateTime{generated.fixtures[5].datestamp.epoch_seconds}.str();
  std::string until = DateTime{generated.fixtures[9].datestamp.epoch_seconds}.str();
  std::string body =
      get_body(repo.port(), "/oai?verb=ListRecords&metadataPrefix=openCost&from=" +
                                from + "&until=" + until);
  OaiPage page = parse_oai_response(body);
  std::set<std::string> expected;
  for (std::size_t i = 5; i <= 9; ++i) expected.insert(generated.fixtures[i].identifier);
  std::set<std::string> got;
  for (const auto& r : page.records) got.insert(r.identifier);
  CHECK(got == expected);
  repo.stop();
}

TEST_CASE("protocol error envelopes") {
  GeneratedCorpus generated = generate_corpus(3, 2, 5, 0);
  MockRepo repo({}, generated.fixtures);
  repo.start();

  auto error_code = [&](const std::string& path) {
    try {
      parse_oai_response(get_body(repo.port(), path));
    } catch (const Error& e) {
      return e.detail();
    }
    return std::string("none");
  };

  CHECK(error_code("/oai?verb=Nonsense") == "badVerb");
  CHECK(error_code("/oai?verb=ListRecords") == "badArgument");
  CHECK(error_code("/oai?verb=ListRecords&metadataPrefix=oai_dc") ==
        "cannotDisseminateFormat");
  CHECK(error_code("/oai?verb=ListRecords&resumptionToken=junk") ==
        "badResumptionToken");
  CHECK(error_code(
            "/oai?verb=ListRecords&resumptionToken=junk&metadataPrefix=openCost") ==
        "badArgument");
  CHECK(error_code("/oai?verb=ListRecords&metadataPrefix=openCost&from=2030-01-01") ==
        "noRecordsMatch");
  CHECK(error_code("/oai?verb=GetRecord&metadataPrefix=openCost&identifier=oai:x:nope") ==
        "idDoesNotExist");

  // Identify and ListMetadataFormats answer conformant envelopes
  auto identify = xml::parse(get_body(repo.port(), "/oai?verb=Identify"));
  CHECK(identify.child("Identify") != nullptr);
  auto formats = xml::parse(get_body(repo.port(), "/oai?verb=ListMetadataFormats"));
  REQUIRE(formats.child("ListMetadataFormats"));
  CHECK(formats.child("ListMetadataFormats")->children.size() == 1);

  // GetRecord round trips one decodable document
  std::string body = get_body(repo.port(),
                              "/oai?verb=GetRecord&metadataPrefix=openCost&identifier=" +
                                  generated.fixtures[0].identifier);
  OaiPage page = parse_oai_response(body);
  REQUIRE(page.records.size() == 1);
  REQUIRE(page.records[0].payload_xml);
  Entity entity = decode(*page.records[0].payload_xml, WireFormat::xml);
  CHECK(decode(generated.fixtures[0].document_json, WireFormat::json) == entity);
  repo.stop();
}

TEST_CASE("admin endpoints: manifest, touch, delete") {
  GeneratedCorpus generated = generate_corpus(3, 2, 6, 0);
  MockRepo repo({}, generated.fixtures);
  repo.start();

  auto manifest = repo.manifest();
  CHECK(manifest.size() == 6);

  std::string target = generated.fixtures[2].identifier;
  DateTime before = generated.fixtures[2].datestamp;
  std::string body = get_body(repo.port(), "/admin/touch?id=" + target);
  CHECK(body.find("datestamp") != std::string::npos);
  auto after = repo.manifest();
  DateTime bumped;
  for (const auto& row : after) {
    if (row.identifier == target) bumped = row.datestamp;
  }
  CHECK(before < bumped);

  get_body(repo.port(), "/admin/delete?id=" + target);
  bool deleted = false;
  for (const auto& row : repo.manifest()) {
    if (row.identifier == target) deleted = row.deleted;
  }
  CHECK(deleted);

  // deleted records surface as header-only entries
  std::string list = get_body(repo.port(), "/oai?verb=ListRecords&metadataPrefix=openCost");
  OaiPage page = parse_oai_response(list);
  for (const auto& r : page.records) {
    if (r.identifier == target) {
      CHECK(r.deleted);
      CHECK(!r.payload_xml);
    }
  }
  repo.stop();
}
