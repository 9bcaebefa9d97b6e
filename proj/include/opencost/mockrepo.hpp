#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "opencost/dates.hpp"
#include "opencost/model.hpp"

namespace opencost {

enum class FaultKind { http_503_retry_after, bad_resumption_token, malformed_payload };

struct MockFault {
  int at_page = 1;  // 1-based page number within one ListRecords sequence
  FaultKind kind = FaultKind::http_503_retry_after;
  bool fired = false;
};

struct MockConfig {
  int page_size = 10;
  std::vector<MockFault> faults;
  long token_ttl_seconds = 0;  // 0 = tokens never expire
};

// One harvestable document with its OAI header fields. `document_json` is
// the canonical JSON encoding of the record or contract.
struct FixtureDoc {
  std::string identifier;
  DateTime datestamp;
  bool deleted = false;
  std::string document_json;
};

// In-process OAI-PMH 2.0 endpoint over the fixture corpus: /oai plus the
// test-only endpoints /admin/manifest, /admin/touch and /admin/delete.
class MockRepo {
 public:
  MockRepo(MockConfig config, std::vector<FixtureDoc> fixtures);
  ~MockRepo();

  MockRepo(const MockRepo&) = delete;
  MockRepo& operator=(const MockRepo&) = delete;

  // binds 127.0.0.1 on an ephemeral port and serves on a background thread
  void start();
  void stop();
  int port() const { return port_; }
  std::string oai_endpoint() const;

  struct ManifestRow {
    std::string identifier;
    DateTime datestamp;
    bool deleted = false;
  };
  std::vector<ManifestRow> manifest() const;

  // datestamp bump to max(all datestamps, wall clock) + 1s
  DateTime touch(const std::string& identifier);
  DateTime mark_deleted(const std::string& identifier);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

std::vector<FixtureDoc> load_fixture_corpus(const std::filesystem::path& corpus_jsonl);
void save_fixture_corpus(const std::vector<FixtureDoc>& fixtures,
                         const std::filesystem::path& corpus_jsonl);

// ---------------------------------------------------------------------------
// Deterministic corpus generation: same seed, byte-identical fixtures.
// ---------------------------------------------------------------------------

struct GeneratedCorpus {
  std::vector<FixtureDoc> fixtures;  // records first, then contracts
  std::string rates_csv;             // covers every non-EUR currency used
};

GeneratedCorpus generate_corpus(std::uint64_t seed, int n_institutions, int n_records,
                                int n_contracts);

// writes corpus.jsonl and rates.csv under out_dir
void write_corpus_files(const GeneratedCorpus& corpus,
                        const std::filesystem::path& out_dir);

}  // namespace opencost
