#include <doctest.h>

#include "opencost/cliconfig.hpp"
#include "opencost/errors.hpp"

using namespace opencost;

TEST_CASE("config parsing") {
  CliConfig config = CliConfig::parse(R"({
    "sources": [
      {"source_id": "desy", "endpoint": "http://127.0.0.1:8080/oai"},
      {"source_id": "fzj", "endpoint": "http://127.0.0.1:8081/oai",
       "metadata_prefix": "openCost", "set": "costs"}
    ],
    "state_dir": "/tmp/state",
    "rates_path": "rates.csv"
  })");
  REQUIRE(config.sources.size() == 2);
  CHECK(config.sources[0].source_id == "desy");
  CHECK(config.sources[0].metadata_prefix == "openCost");
  CHECK(!config.sources[0].set);
  CHECK(config.sources[1].set == "costs");
  CHECK(config.state_dir == "/tmp/state");
  CHECK(config.rates_path == "rates.csv");
}

TEST_CASE("config rejections") {
  CHECK_THROWS_AS(CliConfig::parse("not json"), Error);
  CHECK_THROWS_AS(CliConfig::parse("[]"), Error);
  CHECK_THROWS_AS(CliConfig::parse(R"({"sources":[{"source_id":"a"}]})"), Error);
  // duplicate source ids
  CHECK_THROWS_AS(CliConfig::parse(R"({"sources":[
    {"source_id":"a","endpoint":"http://x/oai"},
    {"source_id":"a","endpoint":"http://y/oai"}]})"),
                  Error);
  // empty config is fine
  CHECK(CliConfig::parse("{}").sources.empty());
}
