#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "opencost/codec.hpp"
#include "opencost/dates.hpp"
#include "opencost/model.hpp"

namespace opencost {

enum class EntryStatus { live, deleted, quarantined };
enum class UpsertOutcome { inserted, updated, unchanged_older };

const char* to_string(EntryStatus s);
const char* to_string(UpsertOutcome o);

struct StoredEntry {
  std::string source_id;
  std::string identifier;
  DateTime datestamp;
  EntryStatus status = EntryStatus::live;
  std::string raw;                  // original payload bytes; empty for tombstones
  std::optional<Entity> document;   // decoded; live entries only
  std::string decode_error;         // quarantined entries only
};

struct ScanFilter {
  std::optional<std::string> source_id;
  std::optional<std::string> institution;
  std::optional<Date> published_from;
  std::optional<Date> published_to;
};

// Durable last-write-wins store keyed by (source_id, identifier). One
// append-only JSON-lines log per source under the state directory; replay
// on open reapplies the same LWW rule, so duplicate deliveries are no-ops.
// Single writer, any number of readers.
class Store {
 public:
  explicit Store(std::filesystem::path directory);

  // Decodes raw (format sniffed); decode failures quarantine the entry
  // instead of failing the call. Older-or-equal datestamps are ignored.
  UpsertOutcome upsert(const std::string& source_id, const std::string& identifier,
                       DateTime datestamp, std::string raw);
  UpsertOutcome mark_deleted(const std::string& source_id, const std::string& identifier,
                             DateTime datestamp);

  // Live documents only, deterministic order; duplicate (source, record_id)
  // pairs keep the first identifier in key order.
  Corpus scan(const ScanFilter& filter = {}) const;

  // One canonical JSON document per line, in key order.
  std::string export_snapshot() const;

  const std::map<std::pair<std::string, std::string>, StoredEntry>& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }
  const std::filesystem::path& directory() const { return dir_; }

 private:
  UpsertOutcome apply(StoredEntry entry, bool persist);
  void append_log(const StoredEntry& entry);
  void load();

  std::filesystem::path dir_;
  std::map<std::pair<std::string, std::string>, StoredEntry> entries_;
  std::map<std::string, std::ofstream> logs_;
};

}  // namespace opencost
