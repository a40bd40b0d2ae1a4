#pragma once

// Task decomposition, fan-out through the router, and final synthesis.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mma2a/agents.hpp"
#include "mma2a/benchmark.hpp"
#include "mma2a/router.hpp"

namespace mma2a {

struct SubTask {
  std::string id;
  std::string parent_task_id;
  AgentKind destination = AgentKind::text;
  std::vector<Part> parts;
  std::string instruction;
  std::vector<std::string> depends_on;

  bool is_synthesis() const noexcept { return destination == AgentKind::text; }
};

/// One analysis sub-task per non-text destination (voice first, then vision)
/// and a final synthesis sub-task on the text agent depending on all of them.
std::vector<SubTask> decompose(const BenchmarkTask& task);

struct SubTaskTiming {
  std::string id;
  AgentKind agent = AgentKind::text;
  std::chrono::nanoseconds started{0};  // offset from task submission
  std::chrono::nanoseconds finished{0};
  bool ok = true;
};

struct TaskResult {
  std::string task_id;
  Category category = Category::product_defect;
  std::string arm;
  ActionDecision decision;
  bool correct = false;
  std::vector<Evidence> evidence;
  std::map<AgentKind, std::string> missing_evidence;
  std::chrono::nanoseconds e2e_latency{0};
  std::vector<RoutingDecision> routing_decisions;
  std::vector<SubTaskTiming> subtasks;
  /// sha256 over the task's input parts; equal across arms for a valid pairing.
  std::string input_digest;
};

Json task_result_to_json(const TaskResult& r);
TaskResult task_result_from_json(const Json& j);

/// Canonical digest of a part list (independent of wire encoding).
std::string input_digest(std::span<const Part> parts);

struct OrchestratorConfig {
  bool parallel_subtasks = true;
  std::chrono::milliseconds timeout{60'000};
  /// Test hook: delay applied before dispatching an analysis sub-task.
  std::function<std::chrono::milliseconds(const SubTask&)> dispatch_jitter;
};

/// Drives tasks through a router endpoint. Agent URLs name the real
/// destinations; every request goes to `router_url` with the destination in
/// the X-A2A-Destination header.
class Orchestrator {
 public:
  Orchestrator(std::map<AgentKind, std::string> agent_urls, std::string router_url, std::string arm,
               const KnowledgeBase* kb = nullptr, std::shared_ptr<const RoutingTelemetry> telemetry = nullptr,
               std::shared_ptr<BlobStore> blobs = nullptr, OrchestratorConfig config = {});

  /// Throws agent_unreachable when the synthesis step cannot be reached and
  /// subtask_failure when it fails; failed analysis sub-tasks are recorded as
  /// missing evidence instead.
  TaskResult execute(const BenchmarkTask& task) const;

 private:
  struct Reply {
    std::vector<Part> artifacts;
  };
  Reply dispatch(const SubTask& sub, const BenchmarkTask& task, const std::string& operation) const;

  std::map<AgentKind, std::string> agent_urls_;
  std::string router_url_;
  std::string arm_;
  const KnowledgeBase* kb_;
  std::shared_ptr<const RoutingTelemetry> telemetry_;
  std::shared_ptr<BlobStore> blobs_;
  OrchestratorConfig config_;
};

}  // namespace mma2a
