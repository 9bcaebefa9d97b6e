#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opencost/dates.hpp"

namespace opencost {

// Per-source incremental cursor. `last_successful_until` only ever moves
// forward; a failed run leaves it untouched (at-least-once delivery).
struct HarvestState {
  std::string source_id;
  std::string endpoint;
  std::optional<DateTime> last_successful_until;
  std::string metadata_prefix = "openCost";

  static HarvestState load(const std::filesystem::path& path);
  // write-temp-then-rename; refuses to move the cursor backwards
  void save(const std::filesystem::path& path) const;
};

struct OaiRecord {
  std::string identifier;
  DateTime datestamp;
  bool deleted = false;
  // serialized metadata payload (first element under <metadata>); absent
  // for deleted records
  std::optional<std::string> payload_xml;
};

struct OaiPage {
  std::vector<OaiRecord> records;
  std::optional<std::string> resumption_token;
  std::optional<long> complete_list_size;
};

// Decodes a ListRecords / GetRecord envelope. Protocol errors raise
// OaiError with the protocol code in detail(); anything unrecognizable is
// EnvelopeMalformed.
OaiPage parse_oai_response(std::string_view xml_bytes);

// Exponential backoff with +-20% jitter, capped, Retry-After hint wins.
struct RetryPolicy {
  double base_seconds = 1.0;
  double factor = 2.0;
  double jitter = 0.2;
  double cap_seconds = 60.0;
  int max_attempts = 5;

  // attempt is 1-based; unit_random in [0,1) drives the jitter. Throws
  // RetriesExhausted when attempt exceeds max_attempts.
  double delay_seconds(int attempt, std::optional<double> retry_after_hint,
                       double unit_random) const;
};

struct HarvestOptions {
  RetryPolicy retry;
  std::optional<std::string> set;
  std::function<DateTime()> now;        // defaults to utc_now
  std::function<void(double)> sleep;    // defaults to a real sleep
  std::function<double()> rand01;       // jitter source, seeded by default
  int http_timeout_seconds = 30;
};

struct HarvestWindow {
  std::optional<DateTime> from;
  std::optional<DateTime> until;
};

struct HarvestSummary {
  std::size_t fetched = 0;     // record events delivered (incl. deleted)
  std::size_t deleted = 0;
  int pages = 0;
  int retries = 0;
  int window_restarts = 0;
  bool advanced = false;
  DateTime until;
};

using HarvestSink = std::function<void(const OaiRecord&)>;

// Runs one ListRecords window against state.endpoint, following resumption
// tokens to exhaustion, and advances the state cursor only on full success.
// noRecordsMatch counts as an empty success. badResumptionToken restarts
// the window once, then fails. Throws Unreachable / RetriesExhausted /
// OaiError / EnvelopeMalformed.
HarvestSummary harvest(HarvestState& state, const HarvestSink& sink,
                       const HarvestOptions& options = {},
                       const HarvestWindow& window = {});

}  // namespace opencost
