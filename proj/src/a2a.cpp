#include "mma2a/a2a.hpp"

#include <algorithm>
#include <cctype>

#include "mma2a/base64.hpp"
#include "mma2a/error.hpp"

namespace mma2a {
namespace {

bool is_token_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) return true;
  switch (c) {
    case '!': case '#': case '$': case '&': case '^': case '_': case '.': case '+': case '-':
      return true;
    default:
      return false;
  }
}

bool is_token(std::string_view s) {
  return !s.empty() && s.size() <= 127 && std::all_of(s.begin(), s.end(), is_token_char);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

const Json& require(const Json& j, const char* key, ErrorCode code, std::string_view what) {
  auto it = j.find(key);
  if (it == j.end()) fail(code, std::string(what) + " is missing \"" + key + "\"");
  return *it;
}

std::string require_string(const Json& j, const char* key, ErrorCode code, std::string_view what) {
  const Json& v = require(j, key, code, what);
  if (!v.is_string()) fail(code, std::string(what) + " field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::vector<std::string> require_mime_list(const Json& j, const char* key) {
  const Json& v = require(j, key, ErrorCode::card_parse_error, "skill");
  if (!v.is_array() || v.empty())
    fail(ErrorCode::card_parse_error, std::string("skill \"") + key + "\" must be a non-empty array");
  std::vector<std::string> out;
  for (const auto& m : v) {
    if (!m.is_string() || !is_valid_mime(m.get<std::string>(), true))
      fail(ErrorCode::card_parse_error, std::string("skill \"") + key + "\" holds an invalid MIME type");
    out.push_back(m.get<std::string>());
  }
  return out;
}

bool is_absolute_url(std::string_view url) {
  for (std::string_view scheme : {"http://", "https://"}) {
    if (url.substr(0, scheme.size()) == scheme && url.size() > scheme.size()) return true;
  }
  return false;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::malformed_json, e.what());
  }
}

}  // namespace

std::string_view to_string(Modality m) noexcept {
  switch (m) {
    case Modality::voice: return "voice";
    case Modality::image: return "image";
    case Modality::text: return "text";
    case Modality::data: return "data";
  }
  return "data";
}

std::optional<Modality> parse_modality(std::string_view s) noexcept {
  if (s == "voice") return Modality::voice;
  if (s == "image") return Modality::image;
  if (s == "text") return Modality::text;
  if (s == "data") return Modality::data;
  return std::nullopt;
}

bool is_valid_mime(std::string_view mime, bool allow_wildcard) noexcept {
  const auto slash = mime.find('/');
  if (slash == std::string_view::npos) return false;
  const auto type = mime.substr(0, slash);
  const auto subtype = mime.substr(slash + 1);
  if (allow_wildcard) {
    if (type == "*" && subtype == "*") return true;
    if (subtype == "*") return is_token(type);
  }
  return is_token(type) && is_token(subtype);
}

Part make_text_part(std::string text) { return TextPart{std::move(text)}; }

Part make_file_part(std::string mime_type, Bytes bytes, std::optional<std::string> name) {
  return FilePart{std::move(mime_type), std::move(bytes), std::move(name)};
}

Part make_uri_part(std::string mime_type, std::string uri, std::optional<std::string> name) {
  return FilePart{std::move(mime_type), UriRef{std::move(uri)}, std::move(name)};
}

Part make_data_part(Json value) { return DataPart{std::move(value)}; }

bool is_text(const Part& p) noexcept { return std::holds_alternative<TextPart>(p); }

const std::string& text_of(const Part& p) { return std::get<TextPart>(p).text; }

Modality part_modality(const Part& p) noexcept {
  if (std::holds_alternative<TextPart>(p)) return Modality::text;
  if (std::holds_alternative<DataPart>(p)) return Modality::data;
  const std::string type = lower(std::get<FilePart>(p).mime_type.substr(0, std::get<FilePart>(p).mime_type.find('/')));
  if (type == "audio") return Modality::voice;
  if (type == "image") return Modality::image;
  return Modality::data;
}

std::string representative_mime(const Part& p) {
  if (std::holds_alternative<TextPart>(p)) return "text/plain";
  if (std::holds_alternative<DataPart>(p)) return "application/json";
  return std::get<FilePart>(p).mime_type;
}

Json part_to_json(const Part& p) {
  Json j;
  if (const auto* t = std::get_if<TextPart>(&p)) {
    j["kind"] = "text";
    j["text"] = t->text;
  } else if (const auto* f = std::get_if<FilePart>(&p)) {
    if (!is_valid_mime(f->mime_type)) fail(ErrorCode::invalid_mime, "\"" + f->mime_type + "\"");
    j["kind"] = "file";
    j["mimeType"] = f->mime_type;
    if (f->name) j["name"] = *f->name;
    if (f->is_inline()) {
      if (f->bytes().size() > kMaxInlineBytes)
        fail(ErrorCode::oversize_inline_payload,
             std::to_string(f->bytes().size()) + " inline bytes exceed " + std::to_string(kMaxInlineBytes));
      j["data"] = base64::encode(f->bytes());
    } else {
      j["uri"] = f->uri();
    }
  } else {
    j["kind"] = "data";
    j["data"] = std::get<DataPart>(p).value;
  }
  return j;
}

Part part_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::structural, "part must be an object");
  const std::string kind = require_string(j, "kind", ErrorCode::structural, "part");
  if (kind == "text") {
    return TextPart{require_string(j, "text", ErrorCode::structural, "text part")};
  }
  if (kind == "data") {
    return DataPart{require(j, "data", ErrorCode::structural, "data part")};
  }
  if (kind != "file") fail(ErrorCode::unknown_part_kind, "\"" + kind + "\"");

  const bool has_mime = j.contains("mimeType");
  const bool has_media = j.contains("mediaType");
  if (!has_mime && !has_media) fail(ErrorCode::structural, "file part has neither mimeType nor mediaType");
  std::string mime = require_string(j, has_mime ? "mimeType" : "mediaType", ErrorCode::structural, "file part");
  if (has_mime && has_media && j["mediaType"] != j["mimeType"])
    fail(ErrorCode::structural, "file part mimeType and mediaType disagree");
  if (!is_valid_mime(mime)) fail(ErrorCode::invalid_mime, "\"" + mime + "\"");

  const bool has_data = j.contains("data");
  const bool has_uri = j.contains("uri");
  if (has_data == has_uri) fail(ErrorCode::structural, "file part needs exactly one of data or uri");

  std::optional<std::string> name;
  if (j.contains("name")) name = require_string(j, "name", ErrorCode::structural, "file part");

  if (has_uri) {
    return FilePart{std::move(mime), UriRef{require_string(j, "uri", ErrorCode::structural, "file part")},
                    std::move(name)};
  }
  auto bytes = base64::decode(require_string(j, "data", ErrorCode::structural, "file part"));
  if (!bytes) fail(ErrorCode::structural, "file part data is not valid base64");
  if (bytes->size() > kMaxInlineBytes)
    fail(ErrorCode::oversize_inline_payload, std::to_string(bytes->size()) + " inline bytes");
  return FilePart{std::move(mime), std::move(*bytes), std::move(name)};
}

Json message_to_json(const Message& m) {
  if (m.parts.empty()) fail(ErrorCode::structural, "message has no parts");
  Json j;
  j["kind"] = "message";
  j["role"] = m.role == Role::user ? "user" : "agent";
  j["messageId"] = m.message_id;
  Json parts = Json::array();
  for (const auto& p : m.parts) parts.push_back(part_to_json(p));
  j["parts"] = std::move(parts);
  if (!m.metadata.is_null()) j["metadata"] = m.metadata;
  return j;
}

Message message_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::structural, "message must be an object");
  Message m;
  const std::string role = require_string(j, "role", ErrorCode::structural, "message");
  if (role == "user") {
    m.role = Role::user;
  } else if (role == "agent") {
    m.role = Role::agent;
  } else {
    fail(ErrorCode::structural, "unknown role \"" + role + "\"");
  }
  m.message_id = require_string(j, "messageId", ErrorCode::structural, "message");
  const Json& parts = require(j, "parts", ErrorCode::structural, "message");
  if (!parts.is_array() || parts.empty()) fail(ErrorCode::structural, "message parts must be a non-empty array");
  for (const auto& p : parts) m.parts.push_back(part_from_json(p));
  if (auto it = j.find("metadata"); it != j.end()) m.metadata = *it;
  return m;
}

std::string encode_message(const Message& m) { return message_to_json(m).dump(); }

Message decode_message(std::string_view wire) { return message_from_json(parse_json(wire)); }

Json card_to_json(const AgentCard& card) {
  Json skills = Json::array();
  for (const auto& s : card.skills) {
    skills.push_back({{"id", s.id}, {"name", s.name}, {"inputModes", s.input_modes}, {"outputModes", s.output_modes}});
  }
  return {{"name", card.name},
          {"description", card.description},
          {"url", card.url},
          {"protocolVersion", card.protocol_version},
          {"capabilities", {{"streaming", true}}},
          {"skills", std::move(skills)}};
}

AgentCard card_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::card_parse_error, "card must be an object");
  AgentCard card;
  card.name = require_string(j, "name", ErrorCode::card_parse_error, "card");
  card.url = require_string(j, "url", ErrorCode::card_parse_error, "card");
  if (!is_absolute_url(card.url)) fail(ErrorCode::card_parse_error, "card url \"" + card.url + "\" is not absolute");
  if (j.contains("description") && j["description"].is_string()) card.description = j["description"];
  if (j.contains("protocolVersion") && j["protocolVersion"].is_string()) card.protocol_version = j["protocolVersion"];
  const Json& skills = require(j, "skills", ErrorCode::card_parse_error, "card");
  if (!skills.is_array() || skills.empty()) fail(ErrorCode::card_parse_error, "card needs at least one skill");
  for (const auto& s : skills) {
    if (!s.is_object()) fail(ErrorCode::card_parse_error, "skill must be an object");
    Skill skill;
    skill.id = require_string(s, "id", ErrorCode::card_parse_error, "skill");
    if (s.contains("name") && s["name"].is_string()) skill.name = s["name"];
    skill.input_modes = require_mime_list(s, "inputModes");
    skill.output_modes = require_mime_list(s, "outputModes");
    card.skills.push_back(std::move(skill));
  }
  return card;
}

std::string_view to_string(TaskState s) noexcept {
  switch (s) {
    case TaskState::submitted: return "submitted";
    case TaskState::working: return "working";
    case TaskState::completed: return "completed";
    case TaskState::failed: return "failed";
  }
  return "failed";
}

std::optional<TaskState> parse_task_state(std::string_view s) noexcept {
  if (s == "submitted") return TaskState::submitted;
  if (s == "working") return TaskState::working;
  if (s == "completed") return TaskState::completed;
  if (s == "failed") return TaskState::failed;
  return std::nullopt;
}

bool can_transition(TaskState from, TaskState to) noexcept {
  switch (from) {
    case TaskState::submitted: return to == TaskState::working;
    case TaskState::working: return to == TaskState::completed || to == TaskState::failed;
    default: return false;
  }
}

void A2ATask::transition_to(TaskState next) {
  if (!can_transition(state, next)) {
    fail(ErrorCode::invalid_transition,
         "task " + task_id + ": " + std::string(to_string(state)) + " -> " + std::string(to_string(next)));
  }
  state = next;
}

Json task_to_json(const A2ATask& t) {
  Json history = Json::array();
  for (const auto& m : t.history) history.push_back(message_to_json(m));
  Json parts = Json::array();
  for (const auto& p : t.artifacts) parts.push_back(part_to_json(p));
  Json artifacts = Json::array();
  if (!t.artifacts.empty()) artifacts.push_back({{"artifactId", "result"}, {"parts", std::move(parts)}});
  return {{"kind", "task"},
          {"id", t.task_id},
          {"status", {{"state", to_string(t.state)}}},
          {"history", std::move(history)},
          {"artifacts", std::move(artifacts)}};
}

A2ATask task_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::structural, "task must be an object");
  A2ATask t;
  t.task_id = require_string(j, "id", ErrorCode::structural, "task");
  const Json& status = require(j, "status", ErrorCode::structural, "task");
  auto state = parse_task_state(require_string(status, "state", ErrorCode::structural, "task status"));
  if (!state) fail(ErrorCode::structural, "unknown task state");
  t.state = *state;
  if (auto it = j.find("history"); it != j.end() && it->is_array()) {
    for (const auto& m : *it) t.history.push_back(message_from_json(m));
  }
  if (auto it = j.find("artifacts"); it != j.end() && it->is_array()) {
    for (const auto& a : *it) {
      for (const auto& p : require(a, "parts", ErrorCode::structural, "artifact")) t.artifacts.push_back(part_from_json(p));
    }
  }
  return t;
}

RpcRequest parse_rpc_request(std::string_view body) {
  const Json j = parse_json(body);
  if (!j.is_object()) fail(ErrorCode::structural, "request must be an object");
  if (require_string(j, "jsonrpc", ErrorCode::structural, "request") != "2.0")
    fail(ErrorCode::structural, "jsonrpc must be \"2.0\"");
  RpcRequest req;
  req.method = require_string(j, "method", ErrorCode::structural, "request");
  req.id = require(j, "id", ErrorCode::structural, "request");
  if (!(req.id.is_string() || req.id.is_number() || req.id.is_null()))
    fail(ErrorCode::structural, "request id must be a string, number or null");
  req.params = j.contains("params") ? j["params"] : Json::object();
  return req;
}

std::string encode_rpc_request(const RpcRequest& req) {
  return Json{{"jsonrpc", "2.0"}, {"method", req.method}, {"params", req.params}, {"id", req.id}}.dump();
}

std::string rpc_result(const Json& id, const Json& result) {
  return Json{{"jsonrpc", "2.0"}, {"id", id}, {"result", result}}.dump();
}

std::string rpc_error(const Json& id, int code, std::string_view message) {
  return Json{{"jsonrpc", "2.0"}, {"id", id}, {"error", {{"code", code}, {"message", message}}}}.dump();
}

RpcResponse parse_rpc_response(std::string_view body) {
  const Json j = parse_json(body);
  if (!j.is_object() || j.value("jsonrpc", "") != "2.0") fail(ErrorCode::structural, "not a JSON-RPC 2.0 response");
  RpcResponse res;
  res.id = j.value("id", Json());
  if (auto it = j.find("result"); it != j.end()) {
    res.result = *it;
  } else if (auto err = j.find("error"); err != j.end() && err->is_object()) {
    res.error_code = err->value("code", rpc_code::internal_error);
    res.error_message = err->value("message", "");
  } else {
    fail(ErrorCode::structural, "response has neither result nor error");
  }
  return res;
}

std::string sse_frame(const TaskEvent& event) {
  Json j{{"kind", event.artifacts.empty() ? "status-update" : "artifact-update"},
         {"taskId", event.task_id},
         {"status", {{"state", to_string(event.state)}}},
         {"final", event.final}};
  if (!event.artifacts.empty()) {
    Json parts = Json::array();
    for (const auto& p : event.artifacts) parts.push_back(part_to_json(p));
    j["artifact"] = {{"artifactId", "result"}, {"parts", std::move(parts)}};
  }
  // Compact dumps never contain raw newlines, so one data line suffices.
  return "data: " + j.dump() + "\n\n";
}

TaskEvent sse_parse(std::string_view chunk) {
  const bool terminated = (chunk.size() >= 2 && chunk.substr(chunk.size() - 2) == "\n\n") ||
                          (chunk.size() >= 4 && chunk.substr(chunk.size() - 4) == "\r\n\r\n");
  if (!terminated) fail(ErrorCode::truncated_frame, "event is missing its blank-line terminator");

  std::string data;
  bool have_data = false;
  std::size_t pos = 0;
  while (pos < chunk.size()) {
    auto eol = chunk.find('\n', pos);
    if (eol == std::string_view::npos) eol = chunk.size();
    std::string_view line = chunk.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == ':') continue;
    if (line.substr(0, 5) == "data:") {
      std::string_view value = line.substr(5);
      if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
      if (have_data) data.push_back('\n');
      data.append(value);
      have_data = true;
    }
  }
  if (!have_data) fail(ErrorCode::structural, "event has no data field");

  const Json j = parse_json(data);
  TaskEvent event;
  event.task_id = require_string(j, "taskId", ErrorCode::structural, "event");
  auto state = parse_task_state(
      require_string(require(j, "status", ErrorCode::structural, "event"), "state", ErrorCode::structural, "event"));
  if (!state) fail(ErrorCode::structural, "unknown task state in event");
  event.state = *state;
  event.final = j.value("final", false);
  if (auto it = j.find("artifact"); it != j.end()) {
    for (const auto& p : require(*it, "parts", ErrorCode::structural, "artifact")) {
      event.artifacts.push_back(part_from_json(p));
    }
  }
  return event;
}

std::vector<TaskEvent> sse_parse_stream(std::string_view body) {
  std::vector<TaskEvent> events;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto end = body.find("\n\n", pos);
    if (end == std::string_view::npos) {
      const auto rest = body.substr(pos);
      if (rest.find_first_not_of(" \r\n") != std::string_view::npos)
        fail(ErrorCode::truncated_frame, "stream ends inside an event");
      break;
    }
    events.push_back(sse_parse(body.substr(pos, end + 2 - pos)));
    pos = end + 2;
  }
  return events;
}

}  // namespace mma2a
