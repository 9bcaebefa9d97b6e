#pragma once

#include <compare>
#include <string>
#include <vector>

namespace opencost {

enum class Severity { error, warning };

// One validation finding. `code` values are a stable public contract; CI
// pipelines match on them. `locus` is "<kind>/<id>/<field path>".
struct Finding {
  Severity severity = Severity::error;
  std::string code;
  std::string locus;
  std::string message;

  auto operator<=>(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  bool has_errors() const;
  std::size_t error_count() const;
  std::size_t warning_count() const;

  void add(Severity severity, std::string code, std::string locus, std::string message);
  void merge(ValidationReport other);
  // Deterministic order: by locus, then code, then message.
  void normalize();

  // Canonical JSON (sorted keys, compact).
  std::string to_json() const;
  std::string to_text() const;
};

}  // namespace opencost
