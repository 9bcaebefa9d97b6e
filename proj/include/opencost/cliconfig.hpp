#pragma once

#include <optional>
#include <string>
#include <vector>

namespace opencost {

struct SourceConfig {
  std::string source_id;
  std::string endpoint;
  std::string metadata_prefix = "openCost";
  std::optional<std::string> set;
};

// JSON configuration file:
//   {"sources": [{"source_id": "...", "endpoint": "http://...",
//                 "metadata_prefix": "openCost", "set": "..."}],
//    "state_dir": "...", "rates_path": "..."}
struct CliConfig {
  std::vector<SourceConfig> sources;
  std::optional<std::string> state_dir;
  std::optional<std::string> rates_path;

  static CliConfig parse(std::string_view json_text);  // throws BadConfig
  static CliConfig load(const std::string& path);
};

}  // namespace opencost
