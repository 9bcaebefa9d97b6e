#include "opencost/report.hpp"

#include <algorithm>

#include <json.hpp>

namespace opencost {

bool ValidationReport::has_errors() const { return error_count() > 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(),
      [](const Finding& f) { return f.severity == Severity::error; }));
}

std::size_t ValidationReport::warning_count() const {
  return findings.size() - error_count();
}

void ValidationReport::add(Severity severity, std::string code, std::string locus,
                           std::string message) {
  findings.push_back({severity, std::move(code), std::move(locus), std::move(message)});
}

void ValidationReport::merge(ValidationReport other) {
  findings.insert(findings.end(), std::make_move_iterator(other.findings.begin()),
                  std::make_move_iterator(other.findings.end()));
}

void ValidationReport::normalize() {
  std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    if (a.locus != b.locus) return a.locus < b.locus;
    if (a.code != b.code) return a.code < b.code;
    return a.message < b.message;
  });
  findings.erase(std::unique(findings.begin(), findings.end()), findings.end());
}

std::string ValidationReport::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& f : findings) {
    nlohmann::ordered_json o;
    o["code"] = f.code;
    o["locus"] = f.locus;
    o["message"] = f.message;
    o["severity"] = f.severity == Severity::error ? "error" : "warning";
    arr.push_back(std::move(o));
  }
  nlohmann::ordered_json root;
  root["errors"] = error_count();
  root["findings"] = std::move(arr);
  root["warnings"] = warning_count();
  return root.dump();
}

std::string ValidationReport::to_text() const {
  if (findings.empty()) return "ok: no findings\n";
  std::string out;
  for (const auto& f : findings) {
    out += f.severity == Severity::error ? "error" : "warning";
    out += "  " + f.code + "  " + f.locus + ": " + f.message + "\n";
  }
  out += std::to_string(error_count()) + " error(s), " +
         std::to_string(warning_count()) + " warning(s)\n";
  return out;
}

}  // namespace opencost
