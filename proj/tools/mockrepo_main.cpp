// opencost-mockrepo: fixture generation and a local OAI-PMH endpoint for
// harvester testing.

#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "opencost/errors.hpp"
#include "opencost/mockrepo.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mock OAI-PMH repository for cost metadata"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "write a deterministic fixture corpus");
  std::uint64_t seed = 42;
  int institutions = 3, records = 25, contracts = 2;
  std::string out_dir = "fixtures";
  generate->add_option("--seed", seed, "rng seed (default 42)");
  generate->add_option("--institutions", institutions, "institution count");
  generate->add_option("--records", records, "record count");
  generate->add_option("--contracts", contracts, "contract count");
  generate->add_option("--out", out_dir, "output directory");

  auto* serve = app.add_subcommand("serve", "serve a fixture corpus over /oai");
  std::string corpus_path;
  int page_size = 10;
  long token_ttl = 0;
  std::vector<std::string> fault_specs;
  serve->add_option("--corpus", corpus_path, "corpus.jsonl path")->required();
  serve->add_option("--page-size", page_size, "records per page (default 10)");
  serve->add_option("--token-ttl", token_ttl, "resumption token lifetime seconds");
  serve->add_option("--fault", fault_specs,
                    "inject a fault once: <page>:<503|badtoken|malformed>");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      auto corpus = opencost::generate_corpus(seed, institutions, records, contracts);
      opencost::write_corpus_files(corpus, out_dir);
      std::cout << "wrote " << corpus.fixtures.size() << " fixtures to " << out_dir
                << "\n";
      return 0;
    }

    opencost::MockConfig config;
    config.page_size = page_size;
    config.token_ttl_seconds = token_ttl;
    for (const auto& spec : fault_specs) {
      auto colon = spec.find(':');
      if (colon == std::string::npos) {
        std::cerr << "bad --fault '" << spec << "'\n";
        return 2;
      }
      opencost::MockFault fault;
      fault.at_page = std::stoi(spec.substr(0, colon));
      std::string kind = spec.substr(colon + 1);
      if (kind == "503") fault.kind = opencost::FaultKind::http_503_retry_after;
      else if (kind == "badtoken") fault.kind = opencost::FaultKind::bad_resumption_token;
      else if (kind == "malformed") fault.kind = opencost::FaultKind::malformed_payload;
      else {
        std::cerr << "bad --fault kind '" << kind << "'\n";
        return 2;
      }
      config.faults.push_back(fault);
    }

    auto fixtures = opencost::load_fixture_corpus(corpus_path);
    opencost::MockRepo repo(std::move(config), std::move(fixtures));
    repo.start();
    std::cout << "serving " << repo.oai_endpoint() << "\n" << std::flush;

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    repo.stop();
    return 0;
  } catch (const opencost::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
