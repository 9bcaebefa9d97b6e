#include "opencost/harvest.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "opencost/errors.hpp"
#include "opencost/xml.hpp"

namespace opencost {

namespace {

std::string url_encode(std::string_view value) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : value) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // /oai
};

SplitUrl split_url(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::bad_config, "endpoint '" + endpoint + "' has no scheme");
  }
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

DateTime parse_datestamp(const std::string& text, std::size_t at) {
  auto ds = DateTime::try_parse(text);
  if (!ds) {
    throw Error(ErrorCode::envelope_malformed, "bad datestamp '" + text + "'", at);
  }
  return *ds;
}

std::optional<double> retry_after_header(const httplib::Result& res) {
  if (!res || !res->has_header("Retry-After")) return std::nullopt;
  try {
    return std::stod(res->get_header_value("Retry-After"));
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

HarvestState HarvestState::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read state file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::storage_failure,
                "corrupt state file " + path.string() + ": " + e.what());
  }
  HarvestState state;
  state.source_id = doc.value("source_id", "");
  state.endpoint = doc.value("endpoint", "");
  state.metadata_prefix = doc.value("metadata_prefix", "openCost");
  if (doc.contains("last_successful_until")) {
    state.last_successful_until =
        DateTime::parse(doc["last_successful_until"].get<std::string>());
  }
  return state;
}

void HarvestState::save(const std::filesystem::path& path) const {
  if (std::filesystem::exists(path)) {
    HarvestState previous = load(path);
    if (previous.last_successful_until && last_successful_until &&
        *last_successful_until < *previous.last_successful_until) {
      throw Error(ErrorCode::storage_failure,
                  "refusing to move harvest cursor backwards for " + source_id);
    }
  }
  nlohmann::ordered_json doc;
  doc["endpoint"] = endpoint;
  if (last_successful_until) doc["last_successful_until"] = last_successful_until->str();
  doc["metadata_prefix"] = metadata_prefix;
  doc["source_id"] = source_id;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::storage_failure, "cannot write " + tmp.string());
    out << doc.dump() << '\n';
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::storage_failure,
                "cannot replace state file " + path.string() + ": " + ec.message());
  }
}

OaiPage parse_oai_response(std::string_view xml_bytes) {
  xml::Element root;
  try {
    root = xml::parse(xml_bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::envelope_malformed, e.message());
  }
  if (root.local_name() != "OAI-PMH") {
    throw Error(ErrorCode::envelope_malformed,
                "root element is <" + root.name + ">, expected <OAI-PMH>");
  }
  if (const xml::Element* error = root.child("error")) {
    const std::string* code = error->attr("code");
    std::string code_text = code ? *code : "unknown";
    throw Error(ErrorCode::oai_error, "OAI error " + code_text +
                                          (error->text.empty() ? "" : ": " + error->text))
        .with_detail(code_text);
  }
  const xml::Element* list = root.child("ListRecords");
  if (!list) list = root.child("GetRecord");
  if (!list) {
    throw Error(ErrorCode::envelope_malformed,
                "envelope carries neither ListRecords/GetRecord nor error");
  }
  OaiPage page;
  for (const auto* record_el : list->children_named("record")) {
    const xml::Element* header = record_el->child("header");
    if (!header) {
      throw Error(ErrorCode::envelope_malformed, "record without header", record_el->offset);
    }
    OaiRecord record;
    const xml::Element* identifier = header->child("identifier");
    const xml::Element* datestamp = header->child("datestamp");
    if (!identifier || !datestamp) {
      throw Error(ErrorCode::envelope_malformed, "header misses identifier or datestamp",
                  header->offset);
    }
    record.identifier = identifier->text;
    record.datestamp = parse_datestamp(datestamp->text, datestamp->offset);
    const std::string* status = header->attr("status");
    record.deleted = status && *status == "deleted";
    if (!record.deleted) {
      if (const xml::Element* metadata = record_el->child("metadata")) {
        if (!metadata->children.empty()) {
          record.payload_xml = xml::serialize(metadata->children.front());
        }
      }
    }
    page.records.push_back(std::move(record));
  }
  if (const xml::Element* token = list->child("resumptionToken")) {
    if (!token->text.empty()) page.resumption_token = token->text;
    if (const std::string* size = token->attr("completeListSize")) {
      try {
        page.complete_list_size = std::stol(*size);
      } catch (...) {
        throw Error(ErrorCode::envelope_malformed,
                    "bad completeListSize '" + *size + "'", token->offset);
      }
    }
  }
  return page;
}

double RetryPolicy::delay_seconds(int attempt, std::optional<double> retry_after_hint,
                                  double unit_random) const {
  if (attempt > max_attempts) {
    throw Error(ErrorCode::retries_exhausted,
                "gave up after " + std::to_string(max_attempts) + " attempts");
  }
  if (retry_after_hint) return *retry_after_hint;
  double delay = base_seconds;
  for (int i = 1; i < attempt; ++i) delay *= factor;
  if (delay > cap_seconds) delay = cap_seconds;
  return delay * (1.0 + jitter * (2.0 * unit_random - 1.0));
}

HarvestSummary harvest(HarvestState& state, const HarvestSink& sink,
                       const HarvestOptions& options, const HarvestWindow& window) {
  auto now_fn = options.now ? options.now : utc_now;
  auto sleep_fn = options.sleep ? options.sleep : [](double seconds) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  };
  std::function<double()> rand_fn = options.rand01;
  if (!rand_fn) {
    auto rng = std::make_shared<std::mt19937_64>(std::random_device{}());
    rand_fn = [rng] {
      return static_cast<double>((*rng)() >> 11) / 9007199254740992.0;  // 2^53
    };
  }

  SplitUrl url = split_url(state.endpoint);
  httplib::Client client(url.base);
  client.set_connection_timeout(options.http_timeout_seconds, 0);
  client.set_read_timeout(options.http_timeout_seconds, 0);

  HarvestSummary summary;
  summary.until = window.until ? *window.until : now_fn();
  std::optional<DateTime> from = window.from ? window.from : state.last_successful_until;

  auto initial_query = [&]() {
    std::string q = url.path + "?verb=ListRecords&metadataPrefix=" +
                    url_encode(state.metadata_prefix);
    if (from) {
      // the cursor is an exclusive bound; OAI-PMH from is inclusive, so ask
      // one granularity step later
      DateTime inclusive_from{from->epoch_seconds + 1};
      q += "&from=" + url_encode(inclusive_from.str());
    }
    q += "&until=" + url_encode(summary.until.str());
    if (options.set) q += "&set=" + url_encode(*options.set);
    return q;
  };

  // one page fetch with the retry policy; returns the body
  auto fetch = [&](const std::string& query) {
    for (int attempt = 1;; ++attempt) {
      httplib::Result res = client.Get(query);
      if (res && res->status == 200) return res->body;
      if (res && res->status >= 400 && res->status < 500 && res->status != 408 &&
          res->status != 429) {
        throw Error(ErrorCode::unreachable, "endpoint answered HTTP " +
                                                std::to_string(res->status) + " for " +
                                                query);
      }
      double delay;
      try {
        delay = options.retry.delay_seconds(attempt, retry_after_header(res), rand_fn());
      } catch (const Error&) {
        throw Error(ErrorCode::unreachable,
                    "endpoint " + state.endpoint + " unreachable after " +
                        std::to_string(options.retry.max_attempts) + " attempts");
      }
      ++summary.retries;
      sleep_fn(delay);
    }
  };

  bool restarted_window = false;
  std::optional<std::string> token;
  for (;;) {
    std::string query =
        token ? url.path + "?verb=ListRecords&resumptionToken=" + url_encode(*token)
              : initial_query();
    std::string body = fetch(query);
    OaiPage page;
    try {
      page = parse_oai_response(body);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::oai_error && e.detail() == "noRecordsMatch") {
        if (token) {
          // a continuation cannot legitimately turn empty; treat as expiry
          if (restarted_window) throw;
          restarted_window = true;
          ++summary.window_restarts;
          token.reset();
          continue;
        }
        break;  // empty window is a success
      }
      if (e.code() == ErrorCode::oai_error && e.detail() == "badResumptionToken" && token) {
        if (restarted_window) throw;  // second expiry is fatal
        restarted_window = true;
        ++summary.window_restarts;
        token.reset();
        continue;
      }
      throw;
    }
    ++summary.pages;
    for (const auto& record : page.records) {
      ++summary.fetched;
      if (record.deleted) ++summary.deleted;
      sink(record);
    }
    if (!page.resumption_token) break;
    token = page.resumption_token;
  }

  if (!state.last_successful_until || *state.last_successful_until < summary.until) {
    state.last_successful_until = summary.until;
  }
  summary.advanced = true;
  return summary;
}

}  // namespace opencost
