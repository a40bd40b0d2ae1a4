#include "mma2a/error.hpp"

namespace mma2a {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::malformed_json: return "malformed-json";
    case ErrorCode::unknown_part_kind: return "unknown-part-kind";
    case ErrorCode::invalid_mime: return "invalid-mime";
    case ErrorCode::structural: return "structural-error";
    case ErrorCode::oversize_inline_payload: return "oversize-inline-payload";
    case ErrorCode::truncated_frame: return "truncated-frame";
    case ErrorCode::invalid_transition: return "invalid-transition";
    case ErrorCode::network_unreachable: return "network-unreachable";
    case ErrorCode::card_parse_error: return "card-parse-error";
    case ErrorCode::http_status_error: return "http-status-error";
    case ErrorCode::card_unavailable: return "card-unavailable";
    case ErrorCode::transcoder_failure: return "transcoder-failure";
    case ErrorCode::blob_store_failure: return "blob-store-failure";
    case ErrorCode::unsupported_part: return "unsupported-part";
    case ErrorCode::llm_endpoint_error: return "llm-endpoint-error";
    case ErrorCode::manifest_parse_error: return "manifest-parse-error";
    case ErrorCode::invariant_violation: return "invariant-violation";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::zero_variance: return "zero-variance-differences";
    case ErrorCode::arm_mismatch: return "arm-mismatch";
    case ErrorCode::agent_unreachable: return "agent-unreachable";
    case ErrorCode::subtask_failure: return "sub-task-failure";
    case ErrorCode::bind_failure: return "bind-failure";
    case ErrorCode::config_error: return "config-error";
  }
  return "unknown-error";
}

}  // namespace mma2a
