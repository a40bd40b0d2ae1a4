#pragma once

// Vocabulary shared by the agents, the benchmark and the statistics: agent
// kinds, the closed action label set, task categories and fidelity profiles.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mma2a/a2a.hpp"

namespace mma2a {

enum class AgentKind { voice, vision, text };

inline constexpr std::array<AgentKind, 3> kAllAgentKinds = {AgentKind::voice, AgentKind::vision, AgentKind::text};

std::string_view to_string(AgentKind k) noexcept;
std::optional<AgentKind> parse_agent_kind(std::string_view s) noexcept;

/// Default destination for a part of the given modality.
AgentKind default_agent_for(Modality m) noexcept;

enum class Action {
  approve_warranty,
  deny_warranty,
  initiate_replacement,
  initiate_return,
  order_part,
  escalate_to_specialist,
  provide_instructions,
  troubleshoot_step,
};

inline constexpr std::array<Action, 8> kAllActions = {
    Action::approve_warranty,       Action::deny_warranty,        Action::initiate_replacement,
    Action::initiate_return,        Action::order_part,           Action::escalate_to_specialist,
    Action::provide_instructions,   Action::troubleshoot_step,
};

std::string_view to_string(Action a) noexcept;
std::optional<Action> parse_action(std::string_view s) noexcept;

enum class Category { product_defect, assembly_guidance, visual_troubleshooting, warranty_claim };

inline constexpr std::array<Category, 4> kAllCategories = {
    Category::product_defect, Category::assembly_guidance, Category::visual_troubleshooting,
    Category::warranty_claim};

std::string_view to_string(Category c) noexcept;
std::string_view display_name(Category c) noexcept;
std::optional<Category> parse_category(std::string_view s) noexcept;

enum class Fidelity { native, transcoded };

std::string_view to_string(Fidelity f) noexcept;

/// Evidence fidelity per analysed modality, ordered (voice, image). An absent
/// modality is encoded as `n/a` in the key: "native|n/a".
struct FidelityProfile {
  std::optional<Fidelity> voice;
  std::optional<Fidelity> image;

  std::string key() const;
  static std::optional<FidelityProfile> parse(std::string_view key);
  bool operator==(const FidelityProfile&) const = default;
};

/// Per-task content the scripted agents replay.
struct TaskFixture {
  std::string task_id;
  std::map<AgentKind, std::string> native_summary;
  /// Replaces the default echo of the transcoded text when present.
  std::map<AgentKind, std::string> transcoded_summary;
  std::map<AgentKind, std::map<std::string, std::string>> structured;
  /// Fidelity-profile key -> action.
  std::map<std::string, Action> scripted_decision;
};

using FixtureStore = std::map<std::string, TaskFixture, std::less<>>;

/// Input modes of the reference agents: voice {audio/wav, audio/webm},
/// vision {image/png, image/jpeg}, text {text/plain}.
const std::vector<std::string>& reference_input_modes(AgentKind kind);
AgentCard reference_card(AgentKind kind, std::string url);

}  // namespace mma2a
