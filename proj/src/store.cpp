#include "opencost/store.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "opencost/errors.hpp"

namespace opencost {

namespace {

// log file names must stay stable for any source id
std::string sanitize_source(const std::string& source_id) {
  std::string out;
  for (char c : source_id) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') {
      out += c;
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
      out += buf;
    }
  }
  return out.empty() ? "_" : out;
}

}  // namespace

const char* to_string(EntryStatus s) {
  switch (s) {
    case EntryStatus::live: return "live";
    case EntryStatus::deleted: return "deleted";
    case EntryStatus::quarantined: return "quarantined";
  }
  return "?";
}

const char* to_string(UpsertOutcome o) {
  switch (o) {
    case UpsertOutcome::inserted: return "inserted";
    case UpsertOutcome::updated: return "updated";
    case UpsertOutcome::unchanged_older: return "unchanged_older";
  }
  return "?";
}

Store::Store(std::filesystem::path directory) : dir_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    throw Error(ErrorCode::storage_failure,
                "cannot create store directory " + dir_.string() + ": " + ec.message());
  }
  load();
}

void Store::load() {
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".jsonl" &&
        entry.path().filename().string().rfind("log-", 0) == 0) {
      logs.push_back(entry.path());
    }
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::storage_failure, "cannot read " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
      if (row.is_discarded()) continue;  // torn tail from a crash mid-append
      StoredEntry entry;
      entry.source_id = row.value("source_id", "");
      entry.identifier = row.value("identifier", "");
      auto ds = DateTime::try_parse(row.value("datestamp", ""));
      if (entry.source_id.empty() || entry.identifier.empty() || !ds) continue;
      entry.datestamp = *ds;
      std::string status = row.value("status", "live");
      entry.status = status == "deleted" ? EntryStatus::deleted : EntryStatus::live;
      entry.raw = row.value("raw", "");
      apply(std::move(entry), false);
    }
  }
}

UpsertOutcome Store::upsert(const std::string& source_id, const std::string& identifier,
                            DateTime datestamp, std::string raw) {
  StoredEntry entry;
  entry.source_id = source_id;
  entry.identifier = identifier;
  entry.datestamp = datestamp;
  entry.status = EntryStatus::live;
  entry.raw = std::move(raw);
  return apply(std::move(entry), true);
}

UpsertOutcome Store::mark_deleted(const std::string& source_id,
                                  const std::string& identifier, DateTime datestamp) {
  StoredEntry entry;
  entry.source_id = source_id;
  entry.identifier = identifier;
  entry.datestamp = datestamp;
  entry.status = EntryStatus::deleted;
  return apply(std::move(entry), true);
}

UpsertOutcome Store::apply(StoredEntry entry, bool persist) {
  if (entry.status == EntryStatus::live) {
    try {
      entry.document = decode(entry.raw, sniff_format(entry.raw));
    } catch (const Error& e) {
      entry.status = EntryStatus::quarantined;
      entry.document.reset();
      entry.decode_error = e.what();
    }
  }
  auto key = std::make_pair(entry.source_id, entry.identifier);
  auto it = entries_.find(key);
  UpsertOutcome outcome;
  if (it == entries_.end()) {
    outcome = UpsertOutcome::inserted;
  } else if (entry.datestamp <= it->second.datestamp) {
    return UpsertOutcome::unchanged_older;
  } else {
    outcome = UpsertOutcome::updated;
  }
  if (persist) append_log(entry);
  entries_[key] = std::move(entry);
  return outcome;
}

void Store::append_log(const StoredEntry& entry) {
  auto it = logs_.find(entry.source_id);
  if (it == logs_.end()) {
    auto path = dir_ / ("log-" + sanitize_source(entry.source_id) + ".jsonl");
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::storage_failure, "cannot append to " + path.string());
    it = logs_.emplace(entry.source_id, std::move(out)).first;
  }
  nlohmann::ordered_json row;
  row["datestamp"] = entry.datestamp.str();
  row["identifier"] = entry.identifier;
  if (!entry.raw.empty()) row["raw"] = entry.raw;
  row["source_id"] = entry.source_id;
  row["status"] = entry.status == EntryStatus::deleted ? "deleted" : "live";
  it->second << row.dump() << '\n';
  it->second.flush();
  if (!it->second) {
    throw Error(ErrorCode::storage_failure, "write failed for source " + entry.source_id);
  }
}

Corpus Store::scan(const ScanFilter& filter) const {
  Corpus corpus;
  for (const auto& [key, entry] : entries_) {
    if (entry.status != EntryStatus::live || !entry.document) continue;
    if (filter.source_id && entry.source_id != *filter.source_id) continue;
    if (const auto* rec = std::get_if<PublicationCostRecord>(&*entry.document)) {
      if (filter.institution && rec->institution != *filter.institution) continue;
      if (filter.published_from && rec->publication_date < *filter.published_from) continue;
      if (filter.published_to && *filter.published_to < rec->publication_date) continue;
      try {
        corpus.add_record({entry.source_id, rec->record_id}, *rec);
      } catch (const Error&) {
        // duplicate record_id under a second identifier: first key wins
      }
    } else {
      const auto& con = std::get<Contract>(*entry.document);
      if (filter.institution && !con.has_participant(*filter.institution)) continue;
      try {
        corpus.add_contract(con);
      } catch (const Error&) {
      }
    }
  }
  return corpus;
}

std::string Store::export_snapshot() const {
  std::string out;
  for (const auto& [key, entry] : entries_) {
    if (entry.status != EntryStatus::live || !entry.document) continue;
    out += encode(*entry.document, WireFormat::json);
    out += '\n';
  }
  return out;
}

}  // namespace opencost
