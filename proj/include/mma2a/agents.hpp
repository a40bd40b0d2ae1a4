#pragma once

// The three reference agents (voice, vision, text) and their pluggable
// reasoning backends.

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mma2a/a2a.hpp"
#include "mma2a/domain.hpp"
#include "mma2a/http.hpp"

namespace mma2a {

struct Evidence {
  AgentKind source = AgentKind::text;
  Fidelity fidelity = Fidelity::native;
  std::string summary;
  std::map<std::string, std::string> structured;
  bool operator==(const Evidence&) const = default;
};

Json evidence_to_json(const Evidence& e);
Evidence evidence_from_json(const Json& j);

struct ActionDecision {
  Action action = Action::escalate_to_specialist;
  double confidence = 0.0;
  std::string rationale;
  bool operator==(const ActionDecision&) const = default;
};

Json action_decision_to_json(const ActionDecision& d);
ActionDecision action_decision_from_json(const Json& j);

/// Fidelity profile of a synthesis input: voice slot from the voice agent's
/// evidence, image slot from the vision agent's.
FidelityProfile profile_of(std::span<const Evidence> evidence);

/// Evidence travels to the synthesis agent as one text part:
///
///   evidence-digest v1
///   [voice|native] <summary>
///   [vision|missing] <reason>
///
/// Summaries are flattened to one line.
struct EvidenceDigest {
  std::vector<Evidence> evidence;
  std::map<AgentKind, std::string> missing;
};

inline constexpr std::string_view kDigestHeader = "evidence-digest v1";

std::string format_evidence_digest(const EvidenceDigest& digest);
/// nullopt when `text` is not a digest.
std::optional<EvidenceDigest> parse_evidence_digest(std::string_view text);

struct AnalysisRequest {
  std::string task_id;
  AgentKind agent = AgentKind::text;
  std::string instruction;
  std::span<const Part> parts;
};

struct DecisionRequest {
  std::string task_id;
  std::string kb_context;
  std::span<const Evidence> evidence;
};

class ReasoningBackend {
 public:
  virtual ~ReasoningBackend() = default;
  virtual std::string_view name() const noexcept = 0;
  virtual Evidence analyze(const AnalysisRequest& request) const = 0;
  virtual ActionDecision decide(const DecisionRequest& request) const = 0;
};

/// Whether the parts an agent received are in its native modality.
/// voice: any audio file part; vision: any image file part; text: no part
/// carries the transcoded marker.
Fidelity observed_fidelity(AgentKind agent, std::span<const Part> parts);

/// Replays fixtures: native evidence from the fixture, transcoded evidence
/// echoes the received text, and the decision is looked up by the fidelity
/// profile of the evidence.
class ScriptedFixtureBackend final : public ReasoningBackend {
 public:
  explicit ScriptedFixtureBackend(FixtureStore fixtures);
  std::string_view name() const noexcept override { return "scripted"; }
  Evidence analyze(const AnalysisRequest& request) const override;
  ActionDecision decide(const DecisionRequest& request) const override;

 private:
  FixtureStore fixtures_;
};

struct KeywordRule {
  std::vector<std::string> keywords;  // lower case, all must be present
  Action action = Action::escalate_to_specialist;
};

/// Ordered rule list, one rule per line: `kw1 kw2 -> action`. `#` starts a
/// comment. Matching is case-insensitive on whole words; the first rule whose
/// keywords are all present wins; no match yields escalate_to_specialist.
class KeywordRuleTable {
 public:
  static KeywordRuleTable parse(std::string_view text);
  static KeywordRuleTable load(const std::string& path);

  const std::vector<KeywordRule>& rules() const noexcept { return rules_; }
  std::set<std::string> vocabulary() const;
  std::set<std::string> keywords_in(std::string_view text) const;
  /// Index of the matching rule, if any.
  std::optional<std::size_t> match(const std::set<std::string>& present) const;

 private:
  std::vector<KeywordRule> rules_;
};

/// Lower-cased alphanumeric tokens.
std::vector<std::string> tokenize_words(std::string_view text);

/// Analysis is delegated (normally to the scripted backend); the decision is a
/// keyword-rule match over the evidence summaries.
class KeywordBackend final : public ReasoningBackend {
 public:
  KeywordBackend(KeywordRuleTable rules, std::shared_ptr<const ReasoningBackend> analysis);
  std::string_view name() const noexcept override { return "keyword"; }
  Evidence analyze(const AnalysisRequest& request) const override { return analysis_->analyze(request); }
  ActionDecision decide(const DecisionRequest& request) const override;

 private:
  KeywordRuleTable rules_;
  std::shared_ptr<const ReasoningBackend> analysis_;
};

struct LlmConfig {
  std::string endpoint;  // MMA2A_LLM_ENDPOINT
  std::string api_key;   // MMA2A_LLM_API_KEY
  std::chrono::milliseconds timeout{60'000};
  static LlmConfig from_env();
};

/// Sends the synthesis prompt to an external completion endpoint. Request:
/// {"prompt", "task_id", "allowed_actions"}; response: {"action",
/// "confidence", "rationale"}. Throws llm_endpoint_error.
class ExternalLlmBackend final : public ReasoningBackend {
 public:
  ExternalLlmBackend(LlmConfig config, std::shared_ptr<const ReasoningBackend> analysis);
  std::string_view name() const noexcept override { return "llm"; }
  Evidence analyze(const AnalysisRequest& request) const override { return analysis_->analyze(request); }
  ActionDecision decide(const DecisionRequest& request) const override;

  static std::string build_prompt(const DecisionRequest& request);

 private:
  LlmConfig config_;
  std::shared_ptr<const ReasoningBackend> analysis_;
};

/// Simulated processing time inside the agents, so that latency comparisons
/// have the shape of real model inference without calling one.
struct DelayProfile {
  std::map<std::pair<AgentKind, Fidelity>, std::chrono::milliseconds> analysis;
  std::chrono::milliseconds synthesis_base{0};
  std::chrono::milliseconds synthesis_per_native_evidence{0};

  std::chrono::milliseconds analysis_delay(AgentKind agent, Fidelity fidelity) const;
  std::chrono::milliseconds synthesis_delay(std::span<const Evidence> evidence) const;

  static DelayProfile none() { return {}; }
  static DelayProfile calibrated();
  /// "none" or "calibrated".
  static std::optional<DelayProfile> named(std::string_view name);
};

/// Message metadata keys used between orchestrator and agents.
namespace meta {
inline constexpr const char* kTaskId = "benchmarkTaskId";
inline constexpr const char* kPriority = "priority";
inline constexpr const char* kOperation = "operation";  // "analyze" | "synthesize"
inline constexpr const char* kInstruction = "instruction";
inline constexpr const char* kKbContext = "kbContext";
}  // namespace meta

/// One agent: serves its card and the JSON-RPC task methods. File parts whose
/// MIME is outside the card's input modes are rejected with unsupported_part.
class AgentService {
 public:
  AgentService(AgentKind kind, std::shared_ptr<const ReasoningBackend> backend, DelayProfile delays = {});

  void start(const std::string& host = "127.0.0.1", int port = 0);
  void stop() { server_.stop(); }

  AgentKind kind() const noexcept { return kind_; }
  std::string base_url() const { return server_.base_url(); }
  AgentCard card() const;
  /// Replaces the advertised input modes (tests, capability experiments).
  void set_input_modes(std::vector<std::string> modes);
  std::size_t requests_served() const;

  /// Transport-free entry point, also used by the HTTP handler.
  HttpResponse handle(const std::string& body);

 private:
  struct Outcome {
    A2ATask task;
    std::optional<std::pair<int, std::string>> error;
  };
  Outcome process(const Json& params);

  AgentKind kind_;
  std::shared_ptr<const ReasoningBackend> backend_;
  DelayProfile delays_;
  mutable std::mutex mutex_;
  std::vector<std::string> input_modes_;
  std::map<std::string, A2ATask> tasks_;
  std::size_t served_ = 0;
  HttpServer server_;
};

}  // namespace mma2a
