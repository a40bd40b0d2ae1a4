#include "mma2a/experiment.hpp"

#include "mma2a/error.hpp"

namespace mma2a {

std::string_view to_string(BackendKind b) noexcept {
  switch (b) {
    case BackendKind::keyword: return "keyword";
    case BackendKind::scripted: return "scripted";
    case BackendKind::llm: return "llm";
  }
  return "scripted";
}

std::optional<BackendKind> parse_backend_kind(std::string_view s) noexcept {
  for (auto b : {BackendKind::keyword, BackendKind::scripted, BackendKind::llm}) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

std::shared_ptr<const ReasoningBackend> make_backend(BackendKind kind, const Benchmark& bench, const MeshConfig& config) {
  auto scripted = std::make_shared<const ScriptedFixtureBackend>(bench.fixtures());
  switch (kind) {
    case BackendKind::scripted: return scripted;
    case BackendKind::keyword: {
      const auto path = config.keyword_rules ? config.keyword_rules : bench.keyword_rules;
      if (!path) throw Error(ErrorCode::config_error, "keyword backend needs a rule table (manifest keyword_rules)");
      return std::make_shared<const KeywordBackend>(KeywordRuleTable::load(path->string()), scripted);
    }
    case BackendKind::llm: {
      LlmConfig llm = config.llm;
      if (llm.endpoint.empty()) llm = LlmConfig::from_env();
      if (llm.endpoint.empty()) throw Error(ErrorCode::config_error, "llm backend needs MMA2A_LLM_ENDPOINT");
      return std::make_shared<const ExternalLlmBackend>(std::move(llm), scripted);
    }
  }
  throw Error(ErrorCode::config_error, "unknown backend");
}

AgentMesh::AgentMesh(std::shared_ptr<const ReasoningBackend> backend, const MeshConfig& config) {
  for (auto kind : kAllAgentKinds) {
    auto agent = std::make_unique<AgentService>(kind, backend, config.delays);
    const auto port = config.agent_ports.contains(kind) ? config.agent_ports.at(kind) : 0;
    agent->start(config.host, port);
    agents_.emplace(kind, std::move(agent));
  }
}

AgentMesh::~AgentMesh() { stop(); }

std::map<AgentKind, std::string> AgentMesh::urls() const {
  std::map<AgentKind, std::string> out;
  for (const auto& [kind, agent] : agents_) out[kind] = agent->base_url();
  return out;
}

void AgentMesh::stop() {
  for (auto& [kind, agent] : agents_) agent->stop();
}

RouterNode::RouterNode(RoutingMode mode, const std::filesystem::path& blob_dir, RegistryConfig registry,
                       const std::string& host, int port)
    : registry_(std::make_shared<CardRegistry>(fetch_card_http, steady_clock(), registry)),
      telemetry_(std::make_shared<RoutingTelemetry>()),
      blobs_(std::make_shared<BlobStore>(blob_dir, "")),
      router_(std::make_shared<ModalityRouter>(registry_, mode, telemetry_, blobs_)),
      service_(std::make_unique<RouterService>(router_, blobs_)) {
  service_->start(host, port);
}

RouterNode::~RouterNode() { stop(); }

std::vector<PairedOutcome> pair_outcomes(std::span<const TaskResult> baseline, std::span<const TaskResult> treatment) {
  if (baseline.size() != treatment.size()) {
    throw Error(ErrorCode::arm_mismatch, "arms have " + std::to_string(baseline.size()) + " and " +
                                             std::to_string(treatment.size()) + " tasks");
  }
  std::map<std::string_view, const TaskResult*> by_id;
  for (const auto& t : treatment) {
    if (!by_id.emplace(t.task_id, &t).second) throw Error(ErrorCode::arm_mismatch, "duplicate task " + t.task_id);
  }
  std::vector<PairedOutcome> out;
  out.reserve(baseline.size());
  for (const auto& b : baseline) {
    auto it = by_id.find(b.task_id);
    if (it == by_id.end()) throw Error(ErrorCode::arm_mismatch, "task " + b.task_id + " missing from the treatment arm");
    const TaskResult& t = *it->second;
    if (!b.input_digest.empty() && !t.input_digest.empty() && b.input_digest != t.input_digest) {
      throw Error(ErrorCode::arm_mismatch, "task " + b.task_id + " saw different inputs in the two arms");
    }
    by_id.erase(it);
    out.push_back(PairedOutcome{b.task_id, b.category, b.correct, t.correct, b.e2e_latency, t.e2e_latency});
  }
  return out;
}

ExperimentRun run_paired_experiment(const Benchmark& bench, std::span<const BenchmarkTask> baseline_tasks,
                                    std::span<const BenchmarkTask> treatment_tasks, const ExperimentConfig& config) {
  if (baseline_tasks.size() != treatment_tasks.size()) {
    throw Error(ErrorCode::arm_mismatch, "arms were given different numbers of tasks");
  }
  for (std::size_t i = 0; i < baseline_tasks.size(); ++i) {
    if (baseline_tasks[i].task_id != treatment_tasks[i].task_id) {
      throw Error(ErrorCode::arm_mismatch, "task lists differ at position " + std::to_string(i) + ": " +
                                               baseline_tasks[i].task_id + " vs " + treatment_tasks[i].task_id);
    }
  }

  ExperimentRun run;
  run.backend = config.mesh.backend;
  AgentMesh mesh(make_backend(config.mesh.backend, bench, config.mesh), config.mesh);
  RouterNode base_router(config.baseline, config.work_dir / "blobs-baseline", config.registry, config.mesh.host);
  RouterNode treat_router(config.treatment, config.work_dir / "blobs-treatment", config.registry, config.mesh.host);

  const Orchestrator base(mesh.urls(), base_router.url(), "baseline", &bench.kb, base_router.telemetry(),
                          base_router.blobs(), config.orchestrator);
  const Orchestrator treat(mesh.urls(), treat_router.url(), "treatment", &bench.kb, treat_router.telemetry(),
                           treat_router.blobs(), config.orchestrator);

  run.baseline.arm = "baseline";
  run.baseline.mode = config.baseline;
  run.treatment.arm = "treatment";
  run.treatment.mode = config.treatment;
  for (std::size_t i = 0; i < baseline_tasks.size(); ++i) {
    run.baseline.results.push_back(base.execute(baseline_tasks[i]));
    if (config.on_result) config.on_result(run.baseline.results.back());
    run.treatment.results.push_back(treat.execute(treatment_tasks[i]));
    if (config.on_result) config.on_result(run.treatment.results.back());
  }
  run.baseline.telemetry = base_router.telemetry()->snapshot();
  run.treatment.telemetry = treat_router.telemetry()->snapshot();
  run.outcomes = pair_outcomes(run.baseline.results, run.treatment.results);
  return run;
}

ExperimentRun run_paired_experiment(const Benchmark& bench, const ExperimentConfig& config) {
  return run_paired_experiment(bench, bench.tasks, bench.tasks, config);
}

std::set<std::string> evidence_keywords(const TaskResult& r, const KeywordRuleTable& rules) {
  std::set<std::string> out;
  for (const auto& e : r.evidence) {
    auto found = rules.keywords_in(e.summary);
    out.insert(found.begin(), found.end());
  }
  return out;
}

KeywordInvariance keyword_invariance(const ExperimentRun& run, const KeywordRuleTable& rules) {
  KeywordInvariance k;
  std::map<std::string_view, const TaskResult*> treat;
  for (const auto& t : run.treatment.results) treat[t.task_id] = &t;
  for (const auto& b : run.baseline.results) {
    auto it = treat.find(b.task_id);
    if (it == treat.end()) continue;
    const TaskResult& t = *it->second;
    ++k.tasks;
    const bool same_keywords = evidence_keywords(b, rules) == evidence_keywords(t, rules);
    const bool same_response = b.decision.action == t.decision.action && b.decision.rationale == t.decision.rationale;
    if (same_keywords) ++k.equal_keyword_sets;
    if (same_response) ++k.identical_responses;
    if (same_keywords && b.decision.action != t.decision.action) k.violations.push_back(b.task_id);
  }
  return k;
}

std::vector<AblationRow> run_ablation(const Benchmark& bench, const ExperimentConfig& config,
                                      std::vector<BackendKind> backends) {
  std::vector<AblationRow> rows;
  for (auto backend : backends) {
    ExperimentConfig c = config;
    c.mesh.backend = backend;
    c.work_dir = config.work_dir / std::string(to_string(backend));
    rows.push_back(AblationRow{backend, run_paired_experiment(bench, c)});
  }
  return rows;
}

}  // namespace mma2a
