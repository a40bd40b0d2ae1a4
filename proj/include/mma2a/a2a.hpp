#pragma once

// Wire-level A2A model: parts, messages, agent cards, tasks, the JSON-RPC
// envelope and SSE framing. Field names are listed in PROTOCOL.md.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace mma2a {

using Json = nlohmann::json;
using Bytes = std::vector<std::uint8_t>;

/// Largest file payload that may travel inline (decoded size).
inline constexpr std::size_t kMaxInlineBytes = 1'048'576;

enum class Modality { voice, image, text, data };

std::string_view to_string(Modality m) noexcept;
std::optional<Modality> parse_modality(std::string_view s) noexcept;

/// `type/subtype` with RFC 6838 token characters. Wildcard subtypes (`image/*`)
/// and `*/*` are only legal in capability declarations.
bool is_valid_mime(std::string_view mime, bool allow_wildcard = false) noexcept;

struct TextPart {
  std::string text;
  bool operator==(const TextPart&) const = default;
};

struct UriRef {
  std::string uri;
  bool operator==(const UriRef&) const = default;
};

struct FilePart {
  std::string mime_type;
  std::variant<Bytes, UriRef> payload;
  std::optional<std::string> name;

  bool is_inline() const noexcept { return std::holds_alternative<Bytes>(payload); }
  const Bytes& bytes() const { return std::get<Bytes>(payload); }
  const std::string& uri() const { return std::get<UriRef>(payload).uri; }

  bool operator==(const FilePart&) const = default;
};

struct DataPart {
  Json value;
  bool operator==(const DataPart& other) const { return value == other.value; }
};

using Part = std::variant<TextPart, FilePart, DataPart>;

Part make_text_part(std::string text);
Part make_file_part(std::string mime_type, Bytes bytes, std::optional<std::string> name = std::nullopt);
Part make_uri_part(std::string mime_type, std::string uri, std::optional<std::string> name = std::nullopt);
Part make_data_part(Json value);

bool is_text(const Part& p) noexcept;
const std::string& text_of(const Part& p);

/// audio/* -> voice, image/* -> image, other files -> data. Total.
Modality part_modality(const Part& p) noexcept;

/// The MIME a capability check is made against: `text/plain` for text parts,
/// the declared type for files, `application/json` for data parts.
std::string representative_mime(const Part& p);

Json part_to_json(const Part& p);
Part part_from_json(const Json& j);

enum class Role { user, agent };

struct Message {
  Role role = Role::user;
  std::vector<Part> parts;
  std::string message_id;
  Json metadata;  // null when absent

  bool operator==(const Message& other) const {
    return role == other.role && parts == other.parts && message_id == other.message_id &&
           metadata == other.metadata;
  }
};

Json message_to_json(const Message& m);
Message message_from_json(const Json& j);

/// Deterministic compact JSON. Throws oversize_inline_payload for inline
/// files above kMaxInlineBytes; convert those to URI references first.
std::string encode_message(const Message& m);
Message decode_message(std::string_view wire);

struct Skill {
  std::string id;
  std::string name;
  std::vector<std::string> input_modes;
  std::vector<std::string> output_modes;

  bool operator==(const Skill&) const = default;
};

struct AgentCard {
  std::string name;
  std::string description;
  std::string url;
  std::string protocol_version = "0.2.5";
  std::vector<Skill> skills;

  bool operator==(const AgentCard&) const = default;
};

Json card_to_json(const AgentCard& card);
/// Throws card_parse_error on any structural or invariant problem.
AgentCard card_from_json(const Json& j);

enum class TaskState { submitted, working, completed, failed };

std::string_view to_string(TaskState s) noexcept;
std::optional<TaskState> parse_task_state(std::string_view s) noexcept;
bool can_transition(TaskState from, TaskState to) noexcept;

struct A2ATask {
  std::string task_id;
  TaskState state = TaskState::submitted;
  std::vector<Message> history;
  std::vector<Part> artifacts;

  /// submitted -> working -> (completed | failed). Throws invalid_transition.
  void transition_to(TaskState next);

  bool operator==(const A2ATask&) const = default;
};

Json task_to_json(const A2ATask& t);
A2ATask task_from_json(const Json& j);

// JSON-RPC 2.0 envelope

inline constexpr std::string_view kMethodSend = "tasks/send";
inline constexpr std::string_view kMethodSendSubscribe = "tasks/sendSubscribe";
inline constexpr std::string_view kMethodGet = "tasks/get";

namespace rpc_code {
inline constexpr int parse_error = -32700;
inline constexpr int invalid_request = -32600;
inline constexpr int method_not_found = -32601;
inline constexpr int invalid_params = -32602;
inline constexpr int internal_error = -32603;
inline constexpr int unsupported_part = -32001;
inline constexpr int task_not_found = -32002;
inline constexpr int upstream_error = -32003;
}  // namespace rpc_code

struct RpcRequest {
  std::string method;
  Json params;
  Json id;
};

/// Throws malformed_json or structural. The id is kept as parsed so that
/// responses can echo it unchanged.
RpcRequest parse_rpc_request(std::string_view body);
std::string encode_rpc_request(const RpcRequest& req);
std::string rpc_result(const Json& id, const Json& result);
std::string rpc_error(const Json& id, int code, std::string_view message);

struct RpcResponse {
  Json id;
  std::optional<Json> result;
  std::optional<int> error_code;
  std::string error_message;
};

RpcResponse parse_rpc_response(std::string_view body);

// Server-sent events

struct TaskEvent {
  std::string task_id;
  TaskState state = TaskState::working;
  bool final = false;
  std::vector<Part> artifacts;

  bool operator==(const TaskEvent&) const = default;
};

/// `data: <json>\n\n`
std::string sse_frame(const TaskEvent& event);
/// Parses exactly one frame; throws truncated_frame when the blank-line
/// terminator is missing.
TaskEvent sse_parse(std::string_view chunk);
/// Splits a stream body into frames and parses each.
std::vector<TaskEvent> sse_parse_stream(std::string_view body);

}  // namespace mma2a
