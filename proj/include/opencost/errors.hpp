#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opencost {

enum class ErrorCode {
  // amounts / model construction
  negative_amount,
  bad_currency_code,
  bad_scale,
  malformed_doi,
  invariant_violation,
  duplicate_key,
  // codec
  malformed,
  unknown_root_kind,
  unsupported_version,
  // exchange
  bad_header,
  overlapping_windows,
  non_positive_rate,
  no_rate_for_date,
  // allocation
  dangling_link,
  // harvest / oai
  oai_error,
  envelope_malformed,
  unreachable,
  retries_exhausted,
  payload_decode_error,
  // store / environment
  storage_failure,
  bad_config,
  io_error,
};

const char* error_code_name(ErrorCode code);

// Single exception type for the whole library. `position` is a byte offset
// into the offending document (npos when not applicable), `field` the
// offending field path, `detail` a machine-usable token (e.g. an OAI error
// code or a currency).
class Error : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(std::move(message)) {}

  Error(ErrorCode code, std::string message, std::size_t position)
      : Error(code, message + " (at byte " + std::to_string(position) + ")") {
    position_ = position;
  }

  ErrorCode code() const { return code_; }
  const std::string& message() const { return message_; }
  std::size_t position() const { return position_; }

  const std::string& field() const { return field_; }
  Error& with_field(std::string field) {
    field_ = std::move(field);
    return *this;
  }

  const std::string& detail() const { return detail_; }
  Error& with_detail(std::string detail) {
    detail_ = std::move(detail);
    return *this;
  }

 private:
  ErrorCode code_;
  std::string message_;
  std::size_t position_ = npos;
  std::string field_;
  std::string detail_;
};

}  // namespace opencost
