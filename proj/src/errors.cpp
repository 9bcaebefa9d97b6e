#include "opencost/errors.hpp"

namespace opencost {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::negative_amount: return "NegativeAmount";
    case ErrorCode::bad_currency_code: return "BadCurrencyCode";
    case ErrorCode::bad_scale: return "BadScale";
    case ErrorCode::malformed_doi: return "MalformedDoi";
    case ErrorCode::invariant_violation: return "InvariantViolation";
    case ErrorCode::duplicate_key: return "DuplicateKey";
    case ErrorCode::malformed: return "Malformed";
    case ErrorCode::unknown_root_kind: return "UnknownRootKind";
    case ErrorCode::unsupported_version: return "UnsupportedVersion";
    case ErrorCode::bad_header: return "BadHeader";
    case ErrorCode::overlapping_windows: return "OverlappingWindows";
    case ErrorCode::non_positive_rate: return "NonPositiveRate";
    case ErrorCode::no_rate_for_date: return "NoRateForDate";
    case ErrorCode::dangling_link: return "DanglingLink";
    case ErrorCode::oai_error: return "OaiError";
    case ErrorCode::envelope_malformed: return "EnvelopeMalformed";
    case ErrorCode::unreachable: return "Unreachable";
    case ErrorCode::retries_exhausted: return "RetriesExhausted";
    case ErrorCode::payload_decode_error: return "PayloadDecodeError";
    case ErrorCode::storage_failure: return "StorageFailure";
    case ErrorCode::bad_config: return "BadConfig";
    case ErrorCode::io_error: return "IoError";
  }
  return "Error";
}

}  // namespace opencost
