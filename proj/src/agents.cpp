#include "mma2a/agents.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "mma2a/card_registry.hpp"
#include "mma2a/error.hpp"
#include "mma2a/router.hpp"

namespace mma2a {

Json evidence_to_json(const Evidence& e) {
  return Json{{"source", to_string(e.source)},
              {"fidelity", to_string(e.fidelity)},
              {"summary", e.summary},
              {"structured", e.structured}};
}

Evidence evidence_from_json(const Json& j) {
  try {
    Evidence e;
    auto source = parse_agent_kind(j.at("source").get<std::string>());
    if (!source) throw Error(ErrorCode::structural, "unknown evidence source");
    e.source = *source;
    const auto fid = j.at("fidelity").get<std::string>();
    if (fid != "native" && fid != "transcoded") throw Error(ErrorCode::structural, "unknown fidelity " + fid);
    e.fidelity = fid == "native" ? Fidelity::native : Fidelity::transcoded;
    e.summary = j.at("summary").get<std::string>();
    if (j.contains("structured")) e.structured = j["structured"].get<std::map<std::string, std::string>>();
    return e;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::structural, std::string("evidence: ") + ex.what());
  }
}

Json action_decision_to_json(const ActionDecision& d) {
  return Json{{"action", to_string(d.action)}, {"confidence", d.confidence}, {"rationale", d.rationale}};
}

ActionDecision action_decision_from_json(const Json& j) {
  try {
    auto action = parse_action(j.at("action").get<std::string>());
    if (!action) throw Error(ErrorCode::structural, "action outside the label set: " + j.at("action").dump());
    return ActionDecision{*action, j.value("confidence", 0.0), j.value("rationale", std::string())};
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::structural, std::string("decision: ") + ex.what());
  }
}

FidelityProfile profile_of(std::span<const Evidence> evidence) {
  FidelityProfile p;
  for (const auto& e : evidence) {
    if (e.source == AgentKind::voice && !p.voice) p.voice = e.fidelity;
    if (e.source == AgentKind::vision && !p.image) p.image = e.fidelity;
  }
  return p;
}

namespace {

std::string one_line(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_evidence_digest(const EvidenceDigest& digest) {
  std::string out(kDigestHeader);
  for (const auto& e : digest.evidence) {
    out += "\n[";
    out += to_string(e.source);
    out += '|';
    out += to_string(e.fidelity);
    out += "] ";
    out += one_line(e.summary);
  }
  for (const auto& [kind, reason] : digest.missing) {
    out += "\n[";
    out += to_string(kind);
    out += "|missing] ";
    out += one_line(reason);
  }
  return out;
}

std::optional<EvidenceDigest> parse_evidence_digest(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kDigestHeader) return std::nullopt;
  EvidenceDigest digest;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto close = line.find("] ");
    const auto bar = line.find('|');
    if (line.front() != '[' || close == std::string::npos || bar == std::string::npos || bar > close) {
      throw Error(ErrorCode::structural, "bad evidence digest line: " + line);
    }
    auto kind = parse_agent_kind(std::string_view(line).substr(1, bar - 1));
    const auto tag = line.substr(bar + 1, close - bar - 1);
    if (!kind) throw Error(ErrorCode::structural, "bad evidence digest source: " + line);
    std::string body = line.substr(close + 2);
    if (tag == "missing") {
      digest.missing[*kind] = std::move(body);
    } else if (tag == "native" || tag == "transcoded") {
      digest.evidence.push_back(
          Evidence{*kind, tag == "native" ? Fidelity::native : Fidelity::transcoded, std::move(body), {}});
    } else {
      throw Error(ErrorCode::structural, "bad evidence digest tag: " + line);
    }
  }
  return digest;
}

Fidelity observed_fidelity(AgentKind agent, std::span<const Part> parts) {
  const auto has_file_of = [&](Modality m) {
    return std::any_of(parts.begin(), parts.end(),
                       [&](const Part& p) { return !is_text(p) && part_modality(p) == m; });
  };
  switch (agent) {
    case AgentKind::voice: return has_file_of(Modality::voice) ? Fidelity::native : Fidelity::transcoded;
    case AgentKind::vision: return has_file_of(Modality::image) ? Fidelity::native : Fidelity::transcoded;
    case AgentKind::text:
      for (const auto& p : parts) {
        if (is_text(p) && text_of(p).find(kTranscodedMarker) != std::string::npos) return Fidelity::transcoded;
      }
      return Fidelity::native;
  }
  return Fidelity::native;
}

// ---------------------------------------------------------------------------
// scripted

ScriptedFixtureBackend::ScriptedFixtureBackend(FixtureStore fixtures) : fixtures_(std::move(fixtures)) {}

namespace {

std::string join_texts(std::span<const Part> parts, bool marked_only) {
  std::string out;
  for (const auto& p : parts) {
    if (!is_text(p)) continue;
    const auto& t = text_of(p);
    if (marked_only && t.find(kTranscodedMarker) == std::string::npos) continue;
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

Evidence ScriptedFixtureBackend::analyze(const AnalysisRequest& req) const {
  Evidence e;
  e.source = req.agent;
  e.fidelity = observed_fidelity(req.agent, req.parts);
  const auto it = fixtures_.find(req.task_id);
  const TaskFixture* fx = it == fixtures_.end() ? nullptr : &it->second;

  if (req.agent == AgentKind::text) {
    e.summary = join_texts(req.parts, false);
    return e;
  }
  if (e.fidelity == Fidelity::native) {
    if (fx && fx->native_summary.contains(req.agent)) {
      e.summary = fx->native_summary.at(req.agent);
    } else {
      e.summary = std::string(to_string(req.agent)) + " analysis of " + std::to_string(req.parts.size()) + " part(s)";
    }
    if (fx && fx->structured.contains(req.agent)) e.structured = fx->structured.at(req.agent);
    return e;
  }
  if (fx && fx->transcoded_summary.contains(req.agent)) {
    e.summary = fx->transcoded_summary.at(req.agent);
  } else {
    e.summary = join_texts(req.parts, true);
    if (e.summary.empty()) e.summary = join_texts(req.parts, false);
  }
  return e;
}

ActionDecision ScriptedFixtureBackend::decide(const DecisionRequest& req) const {
  const auto key = profile_of(req.evidence).key();
  const auto it = fixtures_.find(req.task_id);
  if (it != fixtures_.end()) {
    if (auto d = it->second.scripted_decision.find(key); d != it->second.scripted_decision.end()) {
      return ActionDecision{d->second, 0.9, "fixture outcome for profile " + key};
    }
  }
  return ActionDecision{Action::escalate_to_specialist, 0.2, "no fixture outcome for profile " + key};
}

// ---------------------------------------------------------------------------
// keyword rules

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

KeywordRuleTable KeywordRuleTable::parse(std::string_view text) {
  KeywordRuleTable table;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    const auto where = "rule line " + std::to_string(lineno) + ": ";
    if (arrow == std::string_view::npos) throw Error(ErrorCode::config_error, where + "missing '->'");
    KeywordRule rule;
    std::istringstream words{std::string(line.substr(0, arrow))};
    for (std::string w; words >> w;) {
      auto toks = tokenize_words(w);
      if (toks.size() != 1 || toks.front().size() != w.size()) {
        throw Error(ErrorCode::config_error, where + "keyword '" + w + "' is not a single word");
      }
      rule.keywords.push_back(toks.front());
    }
    if (rule.keywords.empty()) throw Error(ErrorCode::config_error, where + "no keywords");
    const auto action_name = trim(line.substr(arrow + 2));
    auto action = parse_action(action_name);
    if (!action) throw Error(ErrorCode::config_error, where + "unknown action '" + std::string(action_name) + "'");
    rule.action = *action;
    table.rules_.push_back(std::move(rule));
  }
  return table;
}

KeywordRuleTable KeywordRuleTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot read rule table " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::set<std::string> KeywordRuleTable::vocabulary() const {
  std::set<std::string> out;
  for (const auto& r : rules_) out.insert(r.keywords.begin(), r.keywords.end());
  return out;
}

std::set<std::string> KeywordRuleTable::keywords_in(std::string_view text) const {
  const auto vocab = vocabulary();
  std::set<std::string> out;
  for (auto& tok : tokenize_words(text)) {
    if (vocab.contains(tok)) out.insert(std::move(tok));
  }
  return out;
}

std::optional<std::size_t> KeywordRuleTable::match(const std::set<std::string>& present) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& kws = rules_[i].keywords;
    if (std::all_of(kws.begin(), kws.end(), [&](const std::string& k) { return present.contains(k); })) return i;
  }
  return std::nullopt;
}

KeywordBackend::KeywordBackend(KeywordRuleTable rules, std::shared_ptr<const ReasoningBackend> analysis)
    : rules_(std::move(rules)), analysis_(std::move(analysis)) {
  if (!analysis_) throw Error(ErrorCode::config_error, "keyword backend needs an analysis delegate");
}

ActionDecision KeywordBackend::decide(const DecisionRequest& req) const {
  std::set<std::string> present;
  for (const auto& e : req.evidence) {
    auto found = rules_.keywords_in(e.summary);
    present.insert(found.begin(), found.end());
  }
  if (auto i = rules_.match(present)) {
    const auto& rule = rules_.rules()[*i];
    std::string why = "rule " + std::to_string(*i + 1) + ":";
    for (const auto& k : rule.keywords) why += " " + k;
    return ActionDecision{rule.action, 1.0, why};
  }
  return ActionDecision{Action::escalate_to_specialist, 0.5, "no rule matched"};
}

// ---------------------------------------------------------------------------
// external model

LlmConfig LlmConfig::from_env() {
  LlmConfig c;
  if (const char* e = std::getenv("MMA2A_LLM_ENDPOINT")) c.endpoint = e;
  if (const char* k = std::getenv("MMA2A_LLM_API_KEY")) c.api_key = k;
  return c;
}

ExternalLlmBackend::ExternalLlmBackend(LlmConfig config, std::shared_ptr<const ReasoningBackend> analysis)
    : config_(std::move(config)), analysis_(std::move(analysis)) {
  if (!analysis_) throw Error(ErrorCode::config_error, "llm backend needs an analysis delegate");
}

std::string ExternalLlmBackend::build_prompt(const DecisionRequest& req) {
  std::string p = "You are a customer-service decision agent. Choose exactly one action from:";
  for (auto a : kAllActions) {
    p += ' ';
    p += to_string(a);
  }
  p += "\nEvidence:\n";
  for (const auto& e : req.evidence) {
    p += "- [" + std::string(to_string(e.source)) + ", " + std::string(to_string(e.fidelity)) + "] " +
         one_line(e.summary) + "\n";
  }
  if (!req.kb_context.empty()) p += "Knowledge base:\n" + req.kb_context + "\n";
  p += "Answer as JSON: {\"action\": ..., \"confidence\": 0..1, \"rationale\": ...}";
  return p;
}

ActionDecision ExternalLlmBackend::decide(const DecisionRequest& req) const {
  if (config_.endpoint.empty()) throw Error(ErrorCode::llm_endpoint_error, "MMA2A_LLM_ENDPOINT is not set");
  Json body{{"prompt", build_prompt(req)}, {"task_id", req.task_id}, {"allowed_actions", Json::array()}};
  for (auto a : kAllActions) body["allowed_actions"].push_back(to_string(a));
  HttpClientOptions opts;
  opts.timeout = config_.timeout;
  if (!config_.api_key.empty()) opts.headers["Authorization"] = "Bearer " + config_.api_key;
  HttpResponse resp;
  try {
    resp = http_post(config_.endpoint, body.dump(), "application/json", opts);
  } catch (const Error& e) {
    throw Error(ErrorCode::llm_endpoint_error, e.what());
  }
  if (resp.status != 200) {
    throw Error(ErrorCode::llm_endpoint_error, "endpoint returned HTTP " + std::to_string(resp.status));
  }
  try {
    return action_decision_from_json(Json::parse(resp.body));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::llm_endpoint_error, std::string("unusable completion: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// delays

std::chrono::milliseconds DelayProfile::analysis_delay(AgentKind agent, Fidelity fidelity) const {
  auto it = analysis.find({agent, fidelity});
  return it == analysis.end() ? std::chrono::milliseconds{0} : it->second;
}

std::chrono::milliseconds DelayProfile::synthesis_delay(std::span<const Evidence> evidence) const {
  const auto native = std::count_if(evidence.begin(), evidence.end(), [](const Evidence& e) {
    return e.source != AgentKind::text && e.fidelity == Fidelity::native;
  });
  return synthesis_base + synthesis_per_native_evidence * native;
}

DelayProfile DelayProfile::calibrated() {
  using std::chrono::milliseconds;
  DelayProfile d;
  d.analysis[{AgentKind::voice, Fidelity::native}] = milliseconds{20};
  d.analysis[{AgentKind::voice, Fidelity::transcoded}] = milliseconds{20};
  d.analysis[{AgentKind::vision, Fidelity::native}] = milliseconds{70};
  d.analysis[{AgentKind::vision, Fidelity::transcoded}] = milliseconds{20};
  d.synthesis_base = milliseconds{40};
  d.synthesis_per_native_evidence = milliseconds{16};
  return d;
}

std::optional<DelayProfile> DelayProfile::named(std::string_view name) {
  if (name == "none") return none();
  if (name == "calibrated") return calibrated();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// service

AgentService::AgentService(AgentKind kind, std::shared_ptr<const ReasoningBackend> backend, DelayProfile delays)
    : kind_(kind), backend_(std::move(backend)), delays_(std::move(delays)), input_modes_(reference_input_modes(kind)) {
  if (!backend_) throw Error(ErrorCode::config_error, "agent needs a reasoning backend");
  server_.get(std::string(kAgentCardPath), [this](const HttpRequest&) {
    return HttpResponse{200, card_to_json(card()).dump(), "application/json"};
  });
  server_.post("/", [this](const HttpRequest& req) { return handle(req.body); });
}

void AgentService::start(const std::string& host, int port) { server_.start(host, port); }

AgentCard AgentService::card() const {
  AgentCard c = reference_card(kind_, server_.base_url());
  std::lock_guard lock(mutex_);
  c.skills.front().input_modes = input_modes_;
  return c;
}

void AgentService::set_input_modes(std::vector<std::string> modes) {
  std::lock_guard lock(mutex_);
  input_modes_ = std::move(modes);
}

std::size_t AgentService::requests_served() const {
  std::lock_guard lock(mutex_);
  return served_;
}

AgentService::Outcome AgentService::process(const Json& params) {
  Outcome out;
  Message message;
  try {
    if (!params.is_object() || !params.contains("message")) throw Error(ErrorCode::structural, "params.message is required");
    message = message_from_json(params["message"]);
  } catch (const Error& e) {
    out.error = {rpc_code::invalid_params, e.what()};
    return out;
  }

  CapabilitySet caps;
  {
    std::lock_guard lock(mutex_);
    caps = CapabilitySet(input_modes_.begin(), input_modes_.end());
    ++served_;
  }
  for (const auto& p : message.parts) {
    if (const auto* f = std::get_if<FilePart>(&p); f && !capability_accepts(caps, f->mime_type)) {
      out.error = {rpc_code::unsupported_part, "unsupported part: " + f->mime_type};
      return out;
    }
  }

  const Json meta = message.metadata.is_object() ? message.metadata : params.value("metadata", Json::object());
  auto task_id = params.value("id", std::string());
  if (task_id.empty()) task_id = message.message_id;
  const std::string bench_id = meta.value(meta::kTaskId, task_id);
  const std::string operation =
      meta.value(meta::kOperation, std::string(kind_ == AgentKind::text ? "synthesize" : "analyze"));

  A2ATask& task = out.task;
  task.task_id = task_id;
  task.history.push_back(message);
  task.transition_to(TaskState::working);

  try {
    if (operation == "synthesize") {
      EvidenceDigest digest;
      std::vector<Part> own;
      for (const auto& p : message.parts) {
        if (is_text(p)) {
          if (auto d = parse_evidence_digest(text_of(p))) {
            digest.evidence.insert(digest.evidence.end(), d->evidence.begin(), d->evidence.end());
            digest.missing.insert(d->missing.begin(), d->missing.end());
            continue;
          }
        }
        own.push_back(p);
      }
      std::vector<Evidence> evidence = digest.evidence;
      if (!own.empty()) {
        evidence.push_back(backend_->analyze({bench_id, kind_, meta.value(meta::kInstruction, std::string()), own}));
      }
      std::this_thread::sleep_for(delays_.synthesis_delay(evidence));
      const ActionDecision decision =
          backend_->decide({bench_id, meta.value(meta::kKbContext, std::string()), evidence});
      Json payload{{"decision", action_decision_to_json(decision)}, {"evidence", Json::array()}};
      for (const auto& e : evidence) payload["evidence"].push_back(evidence_to_json(e));
      if (!digest.missing.empty()) {
        payload["missing"] = Json::object();
        for (const auto& [k, why] : digest.missing) payload["missing"][std::string(to_string(k))] = why;
      }
      task.artifacts.push_back(make_data_part(std::move(payload)));
      task.artifacts.push_back(make_text_part(std::string(to_string(decision.action)) + ": " + decision.rationale));
    } else if (operation == "analyze") {
      const Evidence ev =
          backend_->analyze({bench_id, kind_, meta.value(meta::kInstruction, std::string()), message.parts});
      std::this_thread::sleep_for(delays_.analysis_delay(kind_, ev.fidelity));
      task.artifacts.push_back(make_data_part(Json{{"evidence", evidence_to_json(ev)}}));
      task.artifacts.push_back(make_text_part(ev.summary));
    } else {
      throw Error(ErrorCode::structural, "unknown operation " + operation);
    }
    task.transition_to(TaskState::completed);
  } catch (const Error& e) {
    task.transition_to(TaskState::failed);
    out.error = {e.code() == ErrorCode::structural ? rpc_code::invalid_params : rpc_code::internal_error, e.what()};
  }

  std::lock_guard lock(mutex_);
  tasks_[task.task_id] = task;
  return out;
}

HttpResponse AgentService::handle(const std::string& body) {
  RpcRequest rpc;
  try {
    rpc = parse_rpc_request(body);
  } catch (const Error& e) {
    const int code = e.code() == ErrorCode::malformed_json ? rpc_code::parse_error : rpc_code::invalid_request;
    return {200, rpc_error(nullptr, code, e.what()), "application/json"};
  }

  if (rpc.method == kMethodGet) {
    const auto id = rpc.params.is_object() ? rpc.params.value("id", std::string()) : std::string();
    std::lock_guard lock(mutex_);
    auto it = tasks_.find(id);
    if (it == tasks_.end()) return {200, rpc_error(rpc.id, rpc_code::task_not_found, "no task " + id), "application/json"};
    return {200, rpc_result(rpc.id, task_to_json(it->second)), "application/json"};
  }
  if (rpc.method != kMethodSend && rpc.method != kMethodSendSubscribe) {
    return {200, rpc_error(rpc.id, rpc_code::method_not_found, "unknown method " + rpc.method), "application/json"};
  }

  Outcome out = process(rpc.params);
  if (out.error) return {200, rpc_error(rpc.id, out.error->first, out.error->second), "application/json"};
  if (rpc.method == kMethodSend) return {200, rpc_result(rpc.id, task_to_json(out.task)), "application/json"};

  std::string stream;
  stream += sse_frame(TaskEvent{out.task.task_id, TaskState::working, false, {}});
  stream += sse_frame(TaskEvent{out.task.task_id, TaskState::working, false, out.task.artifacts});
  stream += sse_frame(TaskEvent{out.task.task_id, TaskState::completed, true, {}});
  return {200, std::move(stream), "text/event-stream"};
}

}  // namespace mma2a
