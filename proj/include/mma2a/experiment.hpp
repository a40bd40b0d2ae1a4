#pragma once

// Local agent mesh and the paired-experiment runner.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mma2a/agents.hpp"
#include "mma2a/benchmark.hpp"
#include "mma2a/orchestrator.hpp"
#include "mma2a/router_service.hpp"
#include "mma2a/stats.hpp"

namespace mma2a {

enum class BackendKind { keyword, scripted, llm };

std::string_view to_string(BackendKind b) noexcept;
std::optional<BackendKind> parse_backend_kind(std::string_view s) noexcept;

struct MeshConfig {
  std::string host = "127.0.0.1";
  std::map<AgentKind, int> agent_ports;  // missing or 0: ephemeral
  BackendKind backend = BackendKind::scripted;
  DelayProfile delays;
  /// Overrides the manifest's rule file for the keyword backend.
  std::optional<std::filesystem::path> keyword_rules;
  LlmConfig llm;
};

/// Builds the reasoning backend; keyword and llm delegate analysis to the
/// scripted fixtures. Throws config_error.
std::shared_ptr<const ReasoningBackend> make_backend(BackendKind kind, const Benchmark& bench, const MeshConfig& config);

/// The three reference agents, started on construction.
class AgentMesh {
 public:
  AgentMesh(std::shared_ptr<const ReasoningBackend> backend, const MeshConfig& config);
  ~AgentMesh();
  AgentMesh(const AgentMesh&) = delete;
  AgentMesh& operator=(const AgentMesh&) = delete;

  std::map<AgentKind, std::string> urls() const;
  AgentService& agent(AgentKind kind) { return *agents_.at(kind); }
  void stop();

 private:
  std::map<AgentKind, std::unique_ptr<AgentService>> agents_;
};

/// A router with its own registry, telemetry and blob store.
class RouterNode {
 public:
  RouterNode(RoutingMode mode, const std::filesystem::path& blob_dir, RegistryConfig registry = {},
             const std::string& host = "127.0.0.1", int port = 0);
  ~RouterNode();
  RouterNode(const RouterNode&) = delete;
  RouterNode& operator=(const RouterNode&) = delete;

  std::string url() const { return service_->base_url(); }
  const RoutingMode& mode() const noexcept { return router_->mode(); }
  std::shared_ptr<RoutingTelemetry> telemetry() const { return telemetry_; }
  std::shared_ptr<BlobStore> blobs() const { return blobs_; }
  CardRegistry& registry() { return *registry_; }
  void stop() { service_->stop(); }

 private:
  std::shared_ptr<CardRegistry> registry_;
  std::shared_ptr<RoutingTelemetry> telemetry_;
  std::shared_ptr<BlobStore> blobs_;
  std::shared_ptr<ModalityRouter> router_;
  std::unique_ptr<RouterService> service_;
};

struct ArmRun {
  std::string arm;  // "baseline" | "treatment"
  RoutingMode mode;
  std::vector<TaskResult> results;
  std::vector<RoutingDecision> telemetry;
};

struct ExperimentConfig {
  MeshConfig mesh;
  RoutingMode baseline = RoutingMode::text_bottleneck();
  RoutingMode treatment = RoutingMode::native();
  OrchestratorConfig orchestrator;
  RegistryConfig registry;
  /// Scratch directory for the routers' blob stores.
  std::filesystem::path work_dir = std::filesystem::temp_directory_path() / "mma2a";
  /// Called after each task result, in execution order.
  std::function<void(const TaskResult&)> on_result;
};

struct ExperimentRun {
  BackendKind backend = BackendKind::scripted;
  ArmRun baseline;
  ArmRun treatment;
  std::vector<PairedOutcome> outcomes;
};

/// Zips two arms by task id. Throws arm_mismatch when the task sets differ or
/// the paired inputs are not byte-identical.
std::vector<PairedOutcome> pair_outcomes(std::span<const TaskResult> baseline, std::span<const TaskResult> treatment);

/// Every task through both arms with one agent mesh and one router per arm.
/// Tasks run sequentially, alternating arms. Throws arm_mismatch before any
/// execution when the two task lists differ.
ExperimentRun run_paired_experiment(const Benchmark& bench, std::span<const BenchmarkTask> baseline_tasks,
                                    std::span<const BenchmarkTask> treatment_tasks, const ExperimentConfig& config);
ExperimentRun run_paired_experiment(const Benchmark& bench, const ExperimentConfig& config);

/// Which rule-table keywords the evidence of a task result contains.
std::set<std::string> evidence_keywords(const TaskResult& r, const KeywordRuleTable& rules);

struct KeywordInvariance {
  std::size_t tasks = 0;
  std::size_t equal_keyword_sets = 0;
  std::size_t identical_responses = 0;
  /// Tasks with equal keyword sets but different decisions; must stay empty.
  std::vector<std::string> violations;
  double identical_rate() const { return tasks ? double(identical_responses) / double(tasks) : 0.0; }
};

KeywordInvariance keyword_invariance(const ExperimentRun& run, const KeywordRuleTable& rules);

struct AblationRow {
  BackendKind backend = BackendKind::scripted;
  ExperimentRun run;
};

/// {keyword, scripted} x {baseline, treatment}.
std::vector<AblationRow> run_ablation(const Benchmark& bench, const ExperimentConfig& config,
                                      std::vector<BackendKind> backends = {BackendKind::keyword, BackendKind::scripted});

}  // namespace mma2a
