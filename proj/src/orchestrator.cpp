#include "mma2a/orchestrator.hpp"

#include <future>
#include <thread>

#include "mma2a/error.hpp"
#include "mma2a/http.hpp"
#include "mma2a/router_service.hpp"

namespace mma2a {

namespace {

std::string_view instruction_for(AgentKind kind) {
  switch (kind) {
    case AgentKind::voice: return "Transcribe the customer's spoken request and assess sentiment and urgency.";
    case AgentKind::vision: return "Inspect the image, identify the product and characterise any visible condition.";
    case AgentKind::text: return "Combine the evidence with the knowledge base and choose exactly one action.";
  }
  return "";
}

using WallClock = std::chrono::steady_clock;

std::int64_t system_now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::vector<SubTask> decompose(const BenchmarkTask& task) {
  std::map<AgentKind, std::vector<Part>> grouped;
  for (const auto& tp : task.parts) grouped[tp.destination()].push_back(tp.part);

  std::vector<SubTask> out;
  SubTask synth{task.task_id + "/synthesis", task.task_id, AgentKind::text, {}, std::string(instruction_for(AgentKind::text)), {}};
  for (auto kind : {AgentKind::voice, AgentKind::vision}) {
    auto it = grouped.find(kind);
    if (it == grouped.end()) continue;
    SubTask sub{task.task_id + "/" + std::string(to_string(kind)), task.task_id, kind, std::move(it->second),
                std::string(instruction_for(kind)), {}};
    synth.depends_on.push_back(sub.id);
    out.push_back(std::move(sub));
  }
  if (auto it = grouped.find(AgentKind::text); it != grouped.end()) synth.parts = std::move(it->second);
  out.push_back(std::move(synth));
  return out;
}

std::string input_digest(std::span<const Part> parts) {
  Bytes buf;
  const auto add = [&](std::string_view s) { buf.insert(buf.end(), s.begin(), s.end()); };
  for (const auto& p : parts) {
    if (const auto* t = std::get_if<TextPart>(&p)) {
      add("text");
      buf.push_back(0);
      add(t->text);
    } else if (const auto* f = std::get_if<FilePart>(&p)) {
      add("file");
      buf.push_back(0);
      add(f->mime_type);
      buf.push_back(0);
      if (f->is_inline()) {
        buf.insert(buf.end(), f->bytes().begin(), f->bytes().end());
      } else {
        add(f->uri());
      }
    } else {
      add("data");
      buf.push_back(0);
      add(std::get<DataPart>(p).value.dump());
    }
    buf.push_back(0x1e);
  }
  return sha256_hex(buf);
}

Json task_result_to_json(const TaskResult& r) {
  Json j{{"task_id", r.task_id},
         {"category", to_string(r.category)},
         {"arm", r.arm},
         {"decision", action_decision_to_json(r.decision)},
         {"correct", r.correct},
         {"evidence", Json::array()},
         {"e2e_latency_ns", r.e2e_latency.count()},
         {"routing_decisions", Json::array()},
         {"subtasks", Json::array()},
         {"input_digest", r.input_digest}};
  for (const auto& e : r.evidence) j["evidence"].push_back(evidence_to_json(e));
  if (!r.missing_evidence.empty()) {
    j["missing_evidence"] = Json::object();
    for (const auto& [k, why] : r.missing_evidence) j["missing_evidence"][std::string(to_string(k))] = why;
  }
  for (const auto& d : r.routing_decisions) j["routing_decisions"].push_back(decision_to_json(d));
  for (const auto& s : r.subtasks) {
    j["subtasks"].push_back({{"id", s.id},
                             {"agent", to_string(s.agent)},
                             {"started_ns", s.started.count()},
                             {"finished_ns", s.finished.count()},
                             {"ok", s.ok}});
  }
  return j;
}

TaskResult task_result_from_json(const Json& j) {
  try {
    TaskResult r;
    r.task_id = j.at("task_id").get<std::string>();
    auto cat = parse_category(j.at("category").get<std::string>());
    if (!cat) throw Error(ErrorCode::structural, "unknown category in run log");
    r.category = *cat;
    r.arm = j.value("arm", std::string());
    r.decision = action_decision_from_json(j.at("decision"));
    r.correct = j.at("correct").get<bool>();
    for (const auto& e : j.value("evidence", Json::array())) r.evidence.push_back(evidence_from_json(e));
    if (j.contains("missing_evidence")) {
      for (const auto& [k, v] : j["missing_evidence"].items()) {
        if (auto kind = parse_agent_kind(k)) r.missing_evidence[*kind] = v.get<std::string>();
      }
    }
    r.e2e_latency = std::chrono::nanoseconds(j.at("e2e_latency_ns").get<std::int64_t>());
    for (const auto& d : j.value("routing_decisions", Json::array())) r.routing_decisions.push_back(decision_from_json(d));
    for (const auto& s : j.value("subtasks", Json::array())) {
      SubTaskTiming t;
      t.id = s.at("id").get<std::string>();
      t.agent = parse_agent_kind(s.at("agent").get<std::string>()).value_or(AgentKind::text);
      t.started = std::chrono::nanoseconds(s.at("started_ns").get<std::int64_t>());
      t.finished = std::chrono::nanoseconds(s.at("finished_ns").get<std::int64_t>());
      t.ok = s.value("ok", true);
      r.subtasks.push_back(std::move(t));
    }
    r.input_digest = j.value("input_digest", std::string());
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::structural, std::string("run log entry: ") + e.what());
  }
}

Orchestrator::Orchestrator(std::map<AgentKind, std::string> agent_urls, std::string router_url, std::string arm,
                           const KnowledgeBase* kb, std::shared_ptr<const RoutingTelemetry> telemetry,
                           std::shared_ptr<BlobStore> blobs, OrchestratorConfig config)
    : agent_urls_(std::move(agent_urls)),
      router_url_(std::move(router_url)),
      arm_(std::move(arm)),
      kb_(kb),
      telemetry_(std::move(telemetry)),
      blobs_(std::move(blobs)),
      config_(std::move(config)) {
  for (auto kind : kAllAgentKinds) {
    if (!agent_urls_.contains(kind)) {
      throw Error(ErrorCode::config_error, "no URL for the " + std::string(to_string(kind)) + " agent");
    }
  }
}

Orchestrator::Reply Orchestrator::dispatch(const SubTask& sub, const BenchmarkTask& task,
                                           const std::string& operation) const {
  Message msg;
  msg.role = Role::user;
  msg.message_id = arm_ + "/" + sub.id;
  for (const auto& p : sub.parts) {
    if (blobs_) {
      msg.parts.push_back(encode_for_wire(p, *blobs_));
    } else {
      msg.parts.push_back(p);
    }
  }
  msg.metadata = Json{{meta::kTaskId, task.task_id},
                      {meta::kPriority, task.priority.level},
                      {meta::kOperation, operation},
                      {meta::kInstruction, sub.instruction}};
  if (sub.is_synthesis() && kb_) msg.metadata[meta::kKbContext] = kb_->context_for(task);

  const bool streaming = sub.destination == AgentKind::voice;
  RpcRequest rpc;
  rpc.method = std::string(streaming ? kMethodSendSubscribe : kMethodSend);
  rpc.id = msg.message_id;
  rpc.params = Json{{"id", msg.message_id}, {"message", message_to_json(msg)}, {"metadata", msg.metadata}};

  HttpClientOptions opts;
  opts.timeout = config_.timeout;
  opts.headers[std::string(kDestinationHeader)] = agent_urls_.at(sub.destination);
  HttpResponse resp;
  try {
    resp = http_post(router_url_ + "/", encode_rpc_request(rpc), "application/json", opts);
  } catch (const Error& e) {
    throw Error(ErrorCode::agent_unreachable, "router: " + std::string(e.what()));
  }
  if (resp.status != 200) {
    throw Error(ErrorCode::subtask_failure, sub.id + ": HTTP " + std::to_string(resp.status));
  }

  Reply reply;
  if (resp.content_type.starts_with("text/event-stream")) {
    bool completed = false;
    for (auto& ev : sse_parse_stream(resp.body)) {
      reply.artifacts.insert(reply.artifacts.end(), ev.artifacts.begin(), ev.artifacts.end());
      if (ev.final) completed = ev.state == TaskState::completed;
    }
    if (!completed) throw Error(ErrorCode::subtask_failure, sub.id + ": stream ended without completion");
    return reply;
  }
  const RpcResponse rr = parse_rpc_response(resp.body);
  if (rr.error_code) {
    const auto code = *rr.error_code == rpc_code::upstream_error ? ErrorCode::agent_unreachable : ErrorCode::subtask_failure;
    throw Error(code, sub.id + ": " + rr.error_message);
  }
  A2ATask t = task_from_json(*rr.result);
  if (t.state != TaskState::completed) {
    throw Error(ErrorCode::subtask_failure, sub.id + ": task ended " + std::string(to_string(t.state)));
  }
  reply.artifacts = std::move(t.artifacts);
  return reply;
}

namespace {

const Json* find_data(const std::vector<Part>& parts, const char* key) {
  for (const auto& p : parts) {
    if (const auto* d = std::get_if<DataPart>(&p); d && d->value.is_object() && d->value.contains(key)) {
      return &d->value;
    }
  }
  return nullptr;
}

}  // namespace

TaskResult Orchestrator::execute(const BenchmarkTask& task) const {
  TaskResult result;
  result.task_id = task.task_id;
  result.category = task.category;
  result.arm = arm_;
  {
    const auto parts = task.message_parts();
    result.input_digest = input_digest(parts);
  }

  const auto t0 = WallClock::now();
  const auto t0_us = system_now_us();
  auto subtasks = decompose(task);
  SubTask synth = std::move(subtasks.back());
  subtasks.pop_back();

  struct Analysis {
    std::optional<Evidence> evidence;
    std::string failure;
    SubTaskTiming timing;
  };
  const auto run_one = [&](const SubTask& sub) {
    Analysis a;
    a.timing.id = sub.id;
    a.timing.agent = sub.destination;
    if (config_.dispatch_jitter) std::this_thread::sleep_for(config_.dispatch_jitter(sub));
    a.timing.started = WallClock::now() - t0;
    try {
      const Reply r = dispatch(sub, task, "analyze");
      const Json* ev = find_data(r.artifacts, "evidence");
      if (!ev) throw Error(ErrorCode::subtask_failure, sub.id + ": no evidence artifact");
      a.evidence = evidence_from_json((*ev)["evidence"]);
    } catch (const Error& e) {
      a.failure = e.what();
      a.timing.ok = false;
    }
    a.timing.finished = WallClock::now() - t0;
    return a;
  };

  std::vector<Analysis> analyses;
  if (config_.parallel_subtasks) {
    std::vector<std::future<Analysis>> futures;
    for (const auto& sub : subtasks) futures.push_back(std::async(std::launch::async, run_one, std::cref(sub)));
    for (auto& f : futures) analyses.push_back(f.get());
  } else {
    for (const auto& sub : subtasks) analyses.push_back(run_one(sub));
  }

  EvidenceDigest digest;
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    auto& a = analyses[i];
    result.subtasks.push_back(a.timing);
    if (a.evidence) {
      digest.evidence.push_back(*a.evidence);
    } else {
      digest.missing[subtasks[i].destination] = a.failure;
    }
  }
  result.evidence = digest.evidence;
  result.missing_evidence = digest.missing;
  if (!subtasks.empty()) synth.parts.push_back(make_text_part(format_evidence_digest(digest)));

  SubTaskTiming st{synth.id, AgentKind::text, WallClock::now() - t0, {}, true};
  const Reply r = dispatch(synth, task, "synthesize");
  st.finished = WallClock::now() - t0;
  result.subtasks.push_back(st);
  result.e2e_latency = WallClock::now() - t0;

  const Json* payload = find_data(r.artifacts, "decision");
  if (!payload) throw Error(ErrorCode::subtask_failure, synth.id + ": no decision artifact");
  result.decision = action_decision_from_json((*payload)["decision"]);
  for (const auto& e : payload->value("evidence", Json::array())) {
    Evidence ev = evidence_from_json(e);
    if (ev.source == AgentKind::text) result.evidence.push_back(std::move(ev));
  }
  result.correct = score(result.decision, task);

  if (telemetry_) {
    for (auto& d : telemetry_->for_task(task.task_id)) {
      if (d.decided_at_us >= t0_us) result.routing_decisions.push_back(std::move(d));
    }
  }
  return result;
}

}  // namespace mma2a
