#include "opencost/mockrepo.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "opencost/codec.hpp"
#include "opencost/errors.hpp"
#include "opencost/xml.hpp"

namespace opencost {

namespace {

std::string oai_envelope_open(const std::string& verb, const std::string& request_url,
                              DateTime now) {
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>";
  out += "<OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\">";
  out += "<responseDate>" + now.str() + "</responseDate>";
  out += "<request verb=\"" + verb + "\">" + xml::escape_text(request_url) + "</request>";
  return out;
}

std::string oai_error(const std::string& code, const std::string& message,
                      const std::string& request_url, DateTime now) {
  std::string out = oai_envelope_open("", request_url, now);
  // error responses repeat the request element without attributes per spec;
  // harvesters only look at the code
  out += "<error code=\"" + code + "\">" + xml::escape_text(message) + "</error>";
  out += "</OAI-PMH>";
  return out;
}

std::string record_header_xml(const FixtureDoc& doc) {
  std::string out = doc.deleted ? "<header status=\"deleted\">" : "<header>";
  out += "<identifier>" + xml::escape_text(doc.identifier) + "</identifier>";
  out += "<datestamp>" + doc.datestamp.str() + "</datestamp>";
  out += "</header>";
  return out;
}

}  // namespace

struct MockRepo::Impl {
  MockConfig config;
  std::vector<FixtureDoc> fixtures;  // sorted by identifier
  mutable std::mutex mutex;
  httplib::Server server;
  std::thread thread;
  int pages_served = 0;  // within the current ListRecords sequence

  explicit Impl(MockConfig cfg, std::vector<FixtureDoc> docs)
      : config(std::move(cfg)), fixtures(std::move(docs)) {
    std::sort(fixtures.begin(), fixtures.end(),
              [](const FixtureDoc& a, const FixtureDoc& b) {
                return a.identifier < b.identifier;
              });
  }

  FixtureDoc* find(const std::string& identifier) {
    auto it = std::find_if(fixtures.begin(), fixtures.end(), [&](const FixtureDoc& d) {
      return d.identifier == identifier;
    });
    return it == fixtures.end() ? nullptr : &*it;
  }

  MockFault* pending_fault(int page, FaultKind kind) {
    for (auto& fault : config.faults) {
      if (!fault.fired && fault.at_page == page && fault.kind == kind) return &fault;
    }
    return nullptr;
  }

  std::string metadata_xml(const FixtureDoc& doc, bool corrupt) {
    if (corrupt) return "<broken/>";
    std::string xml_doc = transcode(doc.document_json, WireFormat::json, WireFormat::xml);
    // strip the XML declaration; the payload is embedded in the envelope
    auto at = xml_doc.find("?>");
    return at == std::string::npos ? xml_doc : xml_doc.substr(at + 2);
  }

  // token format: offset|until_epoch|from_epoch_or_-1|issued_epoch
  static std::string make_token(std::size_t offset, std::int64_t until,
                                std::int64_t from, std::int64_t issued) {
    return std::to_string(offset) + "|" + std::to_string(until) + "|" +
           std::to_string(from) + "|" + std::to_string(issued);
  }

  struct Token {
    std::size_t offset;
    std::int64_t until;
    std::int64_t from;  // -1 when absent
    std::int64_t issued;
  };

  std::optional<Token> parse_token(const std::string& text) const {
    Token token{};
    std::stringstream ss(text);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '|')) parts.push_back(part);
    if (parts.size() != 4) return std::nullopt;
    try {
      token.offset = std::stoull(parts[0]);
      token.until = std::stoll(parts[1]);
      token.from = std::stoll(parts[2]);
      token.issued = std::stoll(parts[3]);
    } catch (...) {
      return std::nullopt;
    }
    return token;
  }

  void handle_list_records(const httplib::Request& req, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mutex);
    DateTime now = utc_now();
    std::string url = "/oai";

    std::optional<std::int64_t> from;
    std::int64_t until;
    std::size_t offset = 0;

    if (req.has_param("resumptionToken")) {
      if (req.has_param("metadataPrefix") || req.has_param("from") ||
          req.has_param("until") || req.has_param("set")) {
        res.set_content(oai_error("badArgument",
                                  "resumptionToken is an exclusive argument", url, now),
                        "text/xml");
        return;
      }
      ++pages_served;
      if (pending_fault(pages_served, FaultKind::http_503_retry_after)) {
        pending_fault(pages_served, FaultKind::http_503_retry_after)->fired = true;
        --pages_served;  // the retried request serves this page number again
        res.status = 503;
        res.set_header("Retry-After", "1");
        return;
      }
      if (pending_fault(pages_served, FaultKind::bad_resumption_token)) {
        pending_fault(pages_served, FaultKind::bad_resumption_token)->fired = true;
        pages_served = 0;  // harvester restarts the window
        res.set_content(oai_error("badResumptionToken", "token expired (injected)", url, now),
                        "text/xml");
        return;
      }
      auto token = parse_token(req.get_param_value("resumptionToken"));
      if (!token ||
          (config.token_ttl_seconds > 0 &&
           now.epoch_seconds - token->issued > config.token_ttl_seconds)) {
        pages_served = 0;
        res.set_content(oai_error("badResumptionToken", "token invalid or expired", url, now),
                        "text/xml");
        return;
      }
      offset = token->offset;
      until = token->until;
      if (token->from >= 0) from = token->from;
    } else {
      if (!req.has_param("metadataPrefix")) {
        res.set_content(oai_error("badArgument", "metadataPrefix is required", url, now),
                        "text/xml");
        return;
      }
      if (req.get_param_value("metadataPrefix") != "openCost") {
        res.set_content(oai_error("cannotDisseminateFormat",
                                  "only openCost is supported", url, now),
                        "text/xml");
        return;
      }
      pages_served = 1;
      if (MockFault* fault = pending_fault(1, FaultKind::http_503_retry_after)) {
        fault->fired = true;
        pages_served = 0;
        res.status = 503;
        res.set_header("Retry-After", "1");
        return;
      }
      if (MockFault* fault = pending_fault(1, FaultKind::bad_resumption_token)) {
        // a token fault on page 1 cannot reference a token; report it once
        // the first continuation arrives instead
        fault->at_page = 2;
      }
      until = now.epoch_seconds;  // snapshot
      if (req.has_param("until")) {
        auto parsed = DateTime::try_parse(req.get_param_value("until"));
        if (!parsed) {
          res.set_content(oai_error("badArgument", "bad until", url, now), "text/xml");
          return;
        }
        until = parsed->epoch_seconds;
      }
      if (req.has_param("from")) {
        auto parsed = DateTime::try_parse(req.get_param_value("from"));
        if (!parsed) {
          res.set_content(oai_error("badArgument", "bad from", url, now), "text/xml");
          return;
        }
        from = parsed->epoch_seconds;
      }
    }

    // protocol semantics: from and until are both inclusive
    std::vector<const FixtureDoc*> selected;
    for (const auto& doc : fixtures) {
      if (doc.datestamp.epoch_seconds > until) continue;
      if (from && doc.datestamp.epoch_seconds < *from) continue;
      selected.push_back(&doc);
    }

    if (selected.empty() || offset >= selected.size()) {
      if (offset == 0) {
        res.set_content(oai_error("noRecordsMatch", "no records in window", url, now),
                        "text/xml");
        return;
      }
    }

    std::size_t end = std::min(selected.size(), offset + static_cast<std::size_t>(
                                                             config.page_size));
    bool corrupt_page =
        pending_fault(pages_served, FaultKind::malformed_payload) != nullptr;
    if (corrupt_page) {
      pending_fault(pages_served, FaultKind::malformed_payload)->fired = true;
    }

    std::string body = oai_envelope_open("ListRecords", url, now);
    body += "<ListRecords>";
    for (std::size_t i = offset; i < end; ++i) {
      const FixtureDoc& doc = *selected[i];
      body += "<record>";
      body += record_header_xml(doc);
      if (!doc.deleted) {
        bool corrupt = corrupt_page && i == offset;  // first record of the page
        body += "<metadata>" + metadata_xml(doc, corrupt) + "</metadata>";
      }
      body += "</record>";
    }
    if (end < selected.size()) {
      std::string token = make_token(end, until, from ? *from : -1, now.epoch_seconds);
      body += "<resumptionToken completeListSize=\"" +
              std::to_string(selected.size()) + "\">" + token + "</resumptionToken>";
    } else {
      // the final page of a paginated sequence carries an empty token
      if (offset > 0) body += "<resumptionToken/>";
      pages_served = 0;  // sequence complete
    }
    body += "</ListRecords></OAI-PMH>";
    res.set_content(body, "text/xml");
  }

  void handle_get_record(const httplib::Request& req, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mutex);
    DateTime now = utc_now();
    if (!req.has_param("identifier") || !req.has_param("metadataPrefix")) {
      res.set_content(oai_error("badArgument", "identifier and metadataPrefix required",
                                "/oai", now),
                      "text/xml");
      return;
    }
    FixtureDoc* doc = find(req.get_param_value("identifier"));
    if (!doc) {
      res.set_content(oai_error("idDoesNotExist", "unknown identifier", "/oai", now),
                      "text/xml");
      return;
    }
    std::string body = oai_envelope_open("GetRecord", "/oai", now);
    body += "<GetRecord><record>";
    body += record_header_xml(*doc);
    if (!doc->deleted) body += "<metadata>" + metadata_xml(*doc, false) + "</metadata>";
    body += "</record></GetRecord></OAI-PMH>";
    res.set_content(body, "text/xml");
  }

  void handle_identify(httplib::Response& res) {
    DateTime now = utc_now();
    std::string body = oai_envelope_open("Identify", "/oai", now);
    body +=
        "<Identify><repositoryName>opencost mock repository</repositoryName>"
        "<baseURL>http://127.0.0.1/oai</baseURL>"
        "<protocolVersion>2.0</protocolVersion>"
        "<adminEmail>nobody@example.org</adminEmail>"
        "<earliestDatestamp>1970-01-01T00:00:00Z</earliestDatestamp>"
        "<deletedRecord>persistent</deletedRecord>"
        "<granularity>YYYY-MM-DDThh:mm:ssZ</granularity></Identify></OAI-PMH>";
    res.set_content(body, "text/xml");
  }

  void handle_list_formats(httplib::Response& res) {
    DateTime now = utc_now();
    std::string body = oai_envelope_open("ListMetadataFormats", "/oai", now);
    body +=
        "<ListMetadataFormats><metadataFormat>"
        "<metadataPrefix>openCost</metadataPrefix>"
        "<schema>https://opencost.example/ns/1.0/schema.xsd</schema>"
        "<metadataNamespace>https://opencost.example/ns/1.0</metadataNamespace>"
        "</metadataFormat></ListMetadataFormats></OAI-PMH>";
    res.set_content(body, "text/xml");
  }

  DateTime bump_clock() const {
    std::int64_t max_ds = utc_now().epoch_seconds;
    for (const auto& doc : fixtures) {
      max_ds = std::max(max_ds, doc.datestamp.epoch_seconds);
    }
    DateTime next;
    next.epoch_seconds = max_ds + 1;
    return next;
  }
};

MockRepo::MockRepo(MockConfig config, std::vector<FixtureDoc> fixtures)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(fixtures))) {}

MockRepo::~MockRepo() { stop(); }

void MockRepo::start() {
  Impl* impl = impl_.get();
  impl->server.Get("/oai", [impl](const httplib::Request& req, httplib::Response& res) {
    std::string verb = req.get_param_value("verb");
    if (verb == "ListRecords") impl->handle_list_records(req, res);
    else if (verb == "GetRecord") impl->handle_get_record(req, res);
    else if (verb == "Identify") impl->handle_identify(res);
    else if (verb == "ListMetadataFormats") impl->handle_list_formats(res);
    else {
      res.set_content(oai_error("badVerb", "unknown verb '" + verb + "'", "/oai", utc_now()),
                      "text/xml");
    }
  });
  impl->server.Get("/admin/manifest",
                   [impl](const httplib::Request&, httplib::Response& res) {
                     std::lock_guard<std::mutex> lock(impl->mutex);
                     nlohmann::ordered_json rows = nlohmann::ordered_json::array();
                     for (const auto& doc : impl->fixtures) {
                       nlohmann::ordered_json row;
                       row["datestamp"] = doc.datestamp.str();
                       row["identifier"] = doc.identifier;
                       row["status"] = doc.deleted ? "deleted" : "live";
                       rows.push_back(std::move(row));
                     }
                     res.set_content(rows.dump(), "application/json");
                   });
  impl->server.Get("/admin/touch", [impl](const httplib::Request& req,
                                          httplib::Response& res) {
    std::lock_guard<std::mutex> lock(impl->mutex);
    FixtureDoc* doc = impl->find(req.get_param_value("id"));
    if (!doc) {
      res.status = 404;
      res.set_content("{\"error\":\"unknown id\"}", "application/json");
      return;
    }
    doc->datestamp = impl->bump_clock();
    res.set_content("{\"datestamp\":\"" + doc->datestamp.str() + "\"}", "application/json");
  });
  impl->server.Get("/admin/delete", [impl](const httplib::Request& req,
                                           httplib::Response& res) {
    std::lock_guard<std::mutex> lock(impl->mutex);
    FixtureDoc* doc = impl->find(req.get_param_value("id"));
    if (!doc) {
      res.status = 404;
      res.set_content("{\"error\":\"unknown id\"}", "application/json");
      return;
    }
    doc->deleted = true;
    doc->datestamp = impl->bump_clock();
    res.set_content("{\"datestamp\":\"" + doc->datestamp.str() + "\"}", "application/json");
  });

  port_ = impl->server.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw Error(ErrorCode::unreachable, "mock repository failed to bind");
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
}

void MockRepo::stop() {
  if (impl_ && impl_->server.is_running()) {
    impl_->server.stop();
  }
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

std::string MockRepo::oai_endpoint() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/oai";
}

std::vector<MockRepo::ManifestRow> MockRepo::manifest() const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  std::vector<ManifestRow> rows;
  for (const auto& doc : impl_->fixtures) {
    rows.push_back({doc.identifier, doc.datestamp, doc.deleted});
  }
  return rows;
}

DateTime MockRepo::touch(const std::string& identifier) {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  FixtureDoc* doc = impl_->find(identifier);
  if (!doc) throw Error(ErrorCode::bad_config, "unknown fixture '" + identifier + "'");
  doc->datestamp = impl_->bump_clock();
  return doc->datestamp;
}

DateTime MockRepo::mark_deleted(const std::string& identifier) {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  FixtureDoc* doc = impl_->find(identifier);
  if (!doc) throw Error(ErrorCode::bad_config, "unknown fixture '" + identifier + "'");
  doc->deleted = true;
  doc->datestamp = impl_->bump_clock();
  return doc->datestamp;
}

std::vector<FixtureDoc> load_fixture_corpus(const std::filesystem::path& corpus_jsonl) {
  std::ifstream in(corpus_jsonl, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot read fixture corpus " + corpus_jsonl.string());
  }
  std::vector<FixtureDoc> fixtures;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::ordered_json row;
    try {
      row = nlohmann::ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::malformed, corpus_jsonl.string() + ":" +
                                            std::to_string(line_no) + ": " + e.what());
    }
    FixtureDoc doc;
    doc.identifier = row.at("identifier").get<std::string>();
    doc.datestamp = DateTime::parse(row.at("datestamp").get<std::string>());
    doc.deleted = row.value("status", "live") == "deleted";
    if (row.contains("document")) doc.document_json = row["document"].dump();
    fixtures.push_back(std::move(doc));
  }
  return fixtures;
}

void save_fixture_corpus(const std::vector<FixtureDoc>& fixtures,
                         const std::filesystem::path& corpus_jsonl) {
  std::ofstream out(corpus_jsonl, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io_error, "cannot write fixture corpus " + corpus_jsonl.string());
  }
  for (const auto& doc : fixtures) {
    nlohmann::ordered_json row;
    row["datestamp"] = doc.datestamp.str();
    if (!doc.document_json.empty()) {
      row["document"] = nlohmann::ordered_json::parse(doc.document_json);
    }
    row["identifier"] = doc.identifier;
    row["status"] = doc.deleted ? "deleted" : "live";
    out << row.dump() << '\n';
  }
}

}  // namespace opencost
