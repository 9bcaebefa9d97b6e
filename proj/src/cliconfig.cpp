#include "opencost/cliconfig.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "opencost/errors.hpp"

namespace opencost {

CliConfig CliConfig::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::bad_config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::bad_config, "config root must be an object");

  CliConfig config;
  std::set<std::string> ids;
  if (doc.contains("sources")) {
    if (!doc["sources"].is_array()) {
      throw Error(ErrorCode::bad_config, "'sources' must be an array");
    }
    for (const auto& item : doc["sources"]) {
      if (!item.is_object() || !item.contains("source_id") || !item.contains("endpoint")) {
        throw Error(ErrorCode::bad_config,
                    "every source needs 'source_id' and 'endpoint'");
      }
      SourceConfig source;
      source.source_id = item["source_id"].get<std::string>();
      source.endpoint = item["endpoint"].get<std::string>();
      source.metadata_prefix = item.value("metadata_prefix", "openCost");
      if (item.contains("set")) source.set = item["set"].get<std::string>();
      if (source.source_id.empty()) {
        throw Error(ErrorCode::bad_config, "source_id must be non-empty");
      }
      if (!ids.insert(source.source_id).second) {
        throw Error(ErrorCode::bad_config, "duplicate source_id '" + source.source_id + "'");
      }
      config.sources.push_back(std::move(source));
    }
  }
  if (doc.contains("state_dir")) config.state_dir = doc["state_dir"].get<std::string>();
  if (doc.contains("rates_path")) config.rates_path = doc["rates_path"].get<std::string>();
  return config;
}

CliConfig CliConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace opencost
