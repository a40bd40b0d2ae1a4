#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mma2a {

enum class ErrorCode {
  malformed_json,
  unknown_part_kind,
  invalid_mime,
  structural,
  oversize_inline_payload,
  truncated_frame,
  invalid_transition,
  network_unreachable,
  card_parse_error,
  http_status_error,
  card_unavailable,
  transcoder_failure,
  blob_store_failure,
  unsupported_part,
  llm_endpoint_error,
  manifest_parse_error,
  invariant_violation,
  empty_input,
  zero_variance,
  arm_mismatch,
  agent_unreachable,
  subtask_failure,
  bind_failure,
  config_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// The single exception type thrown across the library. `code()` is stable
/// and is what callers and tests should branch on; `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mma2a
