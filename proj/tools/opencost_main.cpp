// opencost: validate, harvest, analyze and export publication cost metadata.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "opencost/aggregate.hpp"
#include "opencost/allocation.hpp"
#include "opencost/cliconfig.hpp"
#include "opencost/codec.hpp"
#include "opencost/errors.hpp"
#include "opencost/harvest.hpp"
#include "opencost/mockrepo.hpp"
#include "opencost/store.hpp"
#include "opencost/validate.hpp"

namespace {

using namespace opencost;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitEnvironment = 2;
constexpr int kExitPartial = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string resolve_state_dir(const std::string& flag_value,
                              const std::optional<std::string>& config_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("OPENCOST_STATE_DIR"); env && *env) return env;
  if (config_value) return *config_value;
  throw Error(ErrorCode::bad_config,
              "no state directory: pass --state-dir, set OPENCOST_STATE_DIR or add "
              "state_dir to the config file");
}

std::string money_str(const Money& money) { return money.amount().str(); }

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const std::vector<std::string>& paths, const std::string& format_name,
                 bool strict, bool human, const std::string& today,
                 int skew_years) {
  ValidationOptions options = default_validation_options();
  if (!today.empty()) options.today = Date::parse(today);
  options.invoice_skew_years = skew_years;

  std::optional<WireFormat> forced;
  if (format_name == "xml") forced = WireFormat::xml;
  else if (format_name == "json") forced = WireFormat::json;
  else if (format_name != "auto") {
    std::cerr << "unknown --format '" << format_name << "'\n";
    return kExitEnvironment;
  }

  std::vector<std::pair<std::string, std::string>> documents;
  for (const auto& path : paths) {
    documents.emplace_back(path, slurp(path));
  }
  CorpusValidation result = validate_documents(documents, forced, options);
  if (human) {
    std::cout << result.report.to_text();
  } else {
    std::cout << result.report.to_json() << "\n";
  }
  if (result.report.has_errors()) return kExitValidation;
  if (strict && !result.report.findings.empty()) return kExitValidation;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// harvest
// ---------------------------------------------------------------------------

struct SourceOutcome {
  std::size_t fetched = 0;
  std::size_t inserted = 0;
  std::size_t updated = 0;
  std::size_t unchanged = 0;
  std::size_t deleted = 0;
  std::size_t quarantined = 0;
  bool ok = false;
  std::string error;
};

int cmd_harvest(const CliConfig& config, const std::vector<std::string>& wanted,
                bool all, const std::string& state_dir_flag, const std::string& from,
                const std::string& until, int jobs) {
  std::vector<SourceConfig> sources;
  if (all) {
    sources = config.sources;
  } else {
    for (const auto& id : wanted) {
      auto it = std::find_if(config.sources.begin(), config.sources.end(),
                             [&](const SourceConfig& s) { return s.source_id == id; });
      if (it == config.sources.end()) {
        throw Error(ErrorCode::bad_config, "source '" + id + "' is not in the config");
      }
      sources.push_back(*it);
    }
  }
  if (sources.empty()) {
    throw Error(ErrorCode::bad_config, "nothing to harvest: pass --source or --all");
  }

  std::filesystem::path state_dir = resolve_state_dir(state_dir_flag, config.state_dir);
  std::filesystem::create_directories(state_dir / "sources");
  Store store(state_dir / "store");

  HarvestWindow window;
  if (!from.empty()) window.from = DateTime::parse(from);
  if (!until.empty()) window.until = DateTime::parse(until);

  std::mutex mutex;  // serializes store writes and state saves
  std::map<std::string, SourceOutcome> outcomes;
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= sources.size()) return;
      const SourceConfig& source = sources[i];
      SourceOutcome outcome;
      std::filesystem::path state_path =
          state_dir / "sources" / (source.source_id + ".json");
      HarvestState state;
      if (std::filesystem::exists(state_path)) {
        state = HarvestState::load(state_path);
      }
      state.source_id = source.source_id;
      state.endpoint = source.endpoint;
      state.metadata_prefix = source.metadata_prefix;

      HarvestOptions options;
      options.set = source.set;
      try {
        harvest(
            state,
            [&](const OaiRecord& record) {
              std::lock_guard<std::mutex> lock(mutex);
              ++outcome.fetched;
              if (record.deleted) {
                ++outcome.deleted;
                store.mark_deleted(source.source_id, record.identifier, record.datestamp);
                return;
              }
              UpsertOutcome result = store.upsert(source.source_id, record.identifier,
                                                  record.datestamp,
                                                  record.payload_xml.value_or(""));
              switch (result) {
                case UpsertOutcome::inserted: ++outcome.inserted; break;
                case UpsertOutcome::updated: ++outcome.updated; break;
                case UpsertOutcome::unchanged_older: ++outcome.unchanged; break;
              }
              const auto& entry =
                  store.entries().at({source.source_id, record.identifier});
              if (entry.status == EntryStatus::quarantined &&
                  result != UpsertOutcome::unchanged_older) {
                ++outcome.quarantined;
              }
            },
            options, window);
        std::lock_guard<std::mutex> lock(mutex);
        state.save(state_path);
        outcome.ok = true;
      } catch (const Error& e) {
        outcome.error = e.what();
      }
      std::lock_guard<std::mutex> lock(mutex);
      outcomes[source.source_id] = outcome;
    }
  };

  std::size_t n_threads = std::min<std::size_t>(std::max(jobs, 1), sources.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(work);
  for (auto& t : threads) t.join();

  ordered_json out;
  bool any_failed = false;
  std::size_t total_fetched = 0;
  for (const auto& [id, outcome] : outcomes) {
    ordered_json row;
    row["fetched"] = outcome.fetched;
    row["inserted"] = outcome.inserted;
    row["updated"] = outcome.updated;
    row["unchanged"] = outcome.unchanged;
    row["deleted"] = outcome.deleted;
    row["quarantined"] = outcome.quarantined;
    row["ok"] = outcome.ok;
    if (!outcome.ok) {
      row["error"] = outcome.error;
      any_failed = true;
    }
    total_fetched += outcome.fetched;
    out[id] = std::move(row);
  }
  ordered_json doc;
  doc["sources"] = std::move(out);
  doc["total_fetched"] = total_fetched;
  std::cout << doc.dump() << "\n";
  return any_failed ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------
// report / export
// ---------------------------------------------------------------------------

struct AnalysisInputs {
  Corpus corpus;
  RateTable rates;
  AllocationResult allocation;
};

AnalysisInputs load_analysis(const CliConfig& config, const std::string& state_dir_flag,
                             const std::string& rates_flag) {
  AnalysisInputs inputs;
  std::string rates_path =
      !rates_flag.empty() ? rates_flag : config.rates_path.value_or("");
  if (rates_path.empty()) {
    throw Error(ErrorCode::bad_config, "no rate table: pass --rates or set rates_path");
  }
  inputs.rates = RateTable::load_csv(rates_path);
  std::filesystem::path state_dir = resolve_state_dir(state_dir_flag, config.state_dir);
  if (!std::filesystem::exists(state_dir / "store")) {
    throw Error(ErrorCode::io_error,
                "no store under '" + state_dir.string() + "'; harvest first");
  }
  Store store(state_dir / "store");
  inputs.corpus = store.scan();
  inputs.allocation =
      allocate_corpus(inputs.corpus, build_link_index(inputs.corpus), inputs.rates);
  return inputs;
}

ordered_json skipped_json(const std::vector<SkippedRecord>& skipped) {
  ordered_json rows = ordered_json::array();
  for (const auto& skip : skipped) {
    ordered_json row;
    row["reason"] = skip.reason;
    row["record"] = skip.key.str();
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_report(const AnalysisInputs& inputs, const std::string& kind,
               const std::string& scope, bool include_vat, bool human) {
  AggregateOptions options;
  options.include_vat = include_vat;
  if (scope.rfind("local:", 0) == 0) options.local_institution = scope.substr(6);
  else if (scope != "global") {
    throw Error(ErrorCode::bad_config, "scope must be 'global' or 'local:<institution>'");
  }

  ordered_json doc;
  if (kind == "journal-averages") {
    auto result = journal_averages(inputs.corpus, inputs.allocation, inputs.rates, options);
    ordered_json rows = ordered_json::array();
    for (const auto& row : result.rows) {
      ordered_json r;
      if (row.issn) r["issn"] = *row.issn;
      r["journal_title"] = row.journal_title;
      r["max_eur"] = money_str(row.max_eur);
      r["mean_eur"] = money_str(row.mean_eur);
      r["median_eur"] = money_str(row.median_eur);
      r["min_eur"] = money_str(row.min_eur);
      r["n_articles"] = row.n_articles;
      r["scope"] = row.scope;
      rows.push_back(std::move(r));
      if (human) {
        std::cout << (row.issn ? *row.issn : row.journal_title) << "  n=" << row.n_articles
                  << "  mean=" << money_str(row.mean_eur)
                  << "  median=" << money_str(row.median_eur) << "\n";
      }
    }
    doc["rows"] = std::move(rows);
    doc["skipped"] = skipped_json(result.skipped);
  } else if (kind == "institutions") {
    auto result = institution_report(inputs.corpus, inputs.allocation, inputs.rates, options);
    ordered_json rows = ordered_json::array();
    for (const auto& row : result.rows) {
      ordered_json r;
      r["category"] = row.category;
      r["institution"] = row.institution;
      r["n"] = row.n;
      r["total_eur"] = money_str(row.total_eur);
      r["year"] = row.year;
      rows.push_back(std::move(r));
      if (human) {
        std::cout << row.institution << "  " << row.year << "  " << row.category << "  "
                  << money_str(row.total_eur) << " (" << row.n << ")\n";
      }
    }
    doc["rows"] = std::move(rows);
    doc["skipped"] = skipped_json(result.skipped);
  } else {  // contract-efficiency
    auto rows_data = contract_efficiency_report(inputs.corpus, inputs.allocation);
    ordered_json rows = ordered_json::array();
    for (const auto& row : rows_data) {
      ordered_json r;
      r["contract_id"] = row.contract_id;
      if (row.eur_per_article) r["eur_per_article"] = money_str(*row.eur_per_article);
      else r["eur_per_article"] = nullptr;
      r["n_articles"] = row.n_articles;
      r["total_eur"] = money_str(row.total_eur);
      rows.push_back(std::move(r));
      if (human) {
        std::cout << row.contract_id << "  total=" << money_str(row.total_eur)
                  << "  n=" << row.n_articles << "  per-article="
                  << (row.eur_per_article ? money_str(*row.eur_per_article) : "undefined")
                  << "\n";
      }
    }
    doc["rows"] = std::move(rows);
  }
  if (!human) std::cout << doc.dump() << "\n";
  return kExitOk;
}

int cmd_export(const AnalysisInputs& inputs, const std::string& out_path,
               bool include_vat) {
  AggregateOptions options;
  options.include_vat = include_vat;
  auto result = export_openapc_csv(inputs.corpus, inputs.allocation, inputs.rates, options);
  if (out_path.empty() || out_path == "-") {
    std::cout << result.csv;
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write '" + out_path + "'");
    out << result.csv;
  }
  std::cerr << "skipped " << result.skipped.size()
            << " record(s) without a usable rate\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"publication cost metadata toolkit"};
  app.require_subcommand(1);

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "validate cost documents");
  std::vector<std::string> paths;
  std::string format_name = "auto";
  bool strict = false, human = false;
  std::string today;
  int skew_years = 2;
  validate_cmd->add_option("paths", paths, "document files")->required();
  validate_cmd->add_option("--format", format_name, "xml|json|auto");
  validate_cmd->add_flag("--strict", strict, "warnings also fail");
  validate_cmd->add_flag("--human", human, "human-readable report");
  validate_cmd->add_option("--today", today, "reference date for the future-date rule");
  validate_cmd->add_option("--skew-years", skew_years,
                           "invoice/publication skew threshold (default 2)");

  // harvest
  auto* harvest_cmd = app.add_subcommand("harvest", "pull documents over OAI-PMH");
  std::string config_path = "opencost.json";
  std::vector<std::string> source_ids;
  bool all_sources = false;
  std::string state_dir, from, until;
  int jobs = 4;
  harvest_cmd->add_option("--config", config_path, "config file (default opencost.json)");
  harvest_cmd->add_option("--source", source_ids, "source id (repeatable)");
  harvest_cmd->add_flag("--all", all_sources, "harvest every configured source");
  harvest_cmd->add_option("--state-dir", state_dir, "state directory");
  harvest_cmd->add_option("--from", from, "window start (exclusive, ISO 8601 UTC)");
  harvest_cmd->add_option("--until", until, "window end (inclusive, ISO 8601 UTC)");
  harvest_cmd->add_option("--jobs", jobs, "concurrent sources (default 4)");

  // report
  auto* report_cmd = app.add_subcommand("report", "analytics over the harvested corpus");
  bool journal_averages_flag = false, institutions_flag = false, efficiency_flag = false;
  std::string report_scope = "global", rates_path, report_state_dir,
              report_config = "opencost.json";
  bool include_vat = false, report_human = false;
  report_cmd->add_flag("--journal-averages", journal_averages_flag,
                       "per-journal cost statistics");
  report_cmd->add_flag("--institutions", institutions_flag,
                       "per-institution cost breakdown");
  report_cmd->add_flag("--contract-efficiency", efficiency_flag,
                       "per-contract cost efficiency");
  report_cmd->add_option("--scope", report_scope, "global | local:<institution>");
  report_cmd->add_option("--rates", rates_path, "rate table csv");
  report_cmd->add_option("--state-dir", report_state_dir, "state directory");
  report_cmd->add_option("--config", report_config, "config file");
  report_cmd->add_flag("--include-vat", include_vat, "include VAT in cost totals");
  report_cmd->add_flag("--human", report_human, "human-readable output");

  // export
  auto* export_cmd = app.add_subcommand("export", "OpenAPC-compatible CSV export");
  bool openapc = false;
  std::string export_out, export_rates, export_state_dir, export_config = "opencost.json";
  bool export_vat = false;
  export_cmd->add_flag("--openapc", openapc, "OpenAPC CSV format");
  export_cmd->add_option("--out", export_out, "output file ('-' for stdout)");
  export_cmd->add_option("--rates", export_rates, "rate table csv");
  export_cmd->add_option("--state-dir", export_state_dir, "state directory");
  export_cmd->add_option("--config", export_config, "config file");
  export_cmd->add_flag("--include-vat", export_vat, "include VAT in cost totals");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) {
      return cmd_validate(paths, format_name, strict, human, today, skew_years);
    }
    if (harvest_cmd->parsed()) {
      CliConfig config = CliConfig::load(config_path);
      return cmd_harvest(config, source_ids, all_sources, state_dir, from, until, jobs);
    }
    if (report_cmd->parsed()) {
      int picked = int(journal_averages_flag) + int(institutions_flag) + int(efficiency_flag);
      if (picked != 1) {
        std::cerr << "pick exactly one of --journal-averages, --institutions, "
                     "--contract-efficiency\n";
        return kExitEnvironment;
      }
      CliConfig config;
      if (std::filesystem::exists(report_config)) config = CliConfig::load(report_config);
      AnalysisInputs inputs = load_analysis(config, report_state_dir, rates_path);
      std::string kind = journal_averages_flag ? "journal-averages"
                         : institutions_flag  ? "institutions"
                                              : "contract-efficiency";
      return cmd_report(inputs, kind, report_scope, include_vat, report_human);
    }
    if (export_cmd->parsed()) {
      if (!openapc) {
        std::cerr << "only --openapc export is available\n";
        return kExitEnvironment;
      }
      CliConfig config;
      if (std::filesystem::exists(export_config)) config = CliConfig::load(export_config);
      AnalysisInputs inputs = load_analysis(config, export_state_dir, export_rates);
      return cmd_export(inputs, export_out, export_vat);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::dangling_link) return kExitValidation;
    return kExitEnvironment;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEnvironment;
  }
  return kExitEnvironment;
}
