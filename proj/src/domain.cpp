#include "mma2a/domain.hpp"

namespace mma2a {

std::string_view to_string(AgentKind k) noexcept {
  switch (k) {
    case AgentKind::voice: return "voice";
    case AgentKind::vision: return "vision";
    case AgentKind::text: return "text";
  }
  return "text";
}

std::optional<AgentKind> parse_agent_kind(std::string_view s) noexcept {
  for (auto k : kAllAgentKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

AgentKind default_agent_for(Modality m) noexcept {
  switch (m) {
    case Modality::voice: return AgentKind::voice;
    case Modality::image: return AgentKind::vision;
    default: return AgentKind::text;
  }
}

std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::approve_warranty: return "approve_warranty";
    case Action::deny_warranty: return "deny_warranty";
    case Action::initiate_replacement: return "initiate_replacement";
    case Action::initiate_return: return "initiate_return";
    case Action::order_part: return "order_part";
    case Action::escalate_to_specialist: return "escalate_to_specialist";
    case Action::provide_instructions: return "provide_instructions";
    case Action::troubleshoot_step: return "troubleshoot_step";
  }
  return "escalate_to_specialist";
}

std::optional<Action> parse_action(std::string_view s) noexcept {
  for (auto a : kAllActions) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::product_defect: return "product_defect";
    case Category::assembly_guidance: return "assembly_guidance";
    case Category::visual_troubleshooting: return "visual_troubleshooting";
    case Category::warranty_claim: return "warranty_claim";
  }
  return "product_defect";
}

std::string_view display_name(Category c) noexcept {
  switch (c) {
    case Category::product_defect: return "Product defect report";
    case Category::assembly_guidance: return "Assembly guidance";
    case Category::visual_troubleshooting: return "Visual troubleshooting";
    case Category::warranty_claim: return "Warranty claim";
  }
  return "";
}

std::optional<Category> parse_category(std::string_view s) noexcept {
  for (auto c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Fidelity f) noexcept { return f == Fidelity::native ? "native" : "transcoded"; }

namespace {

std::string_view slot(const std::optional<Fidelity>& f) { return f ? to_string(*f) : "n/a"; }

std::optional<std::optional<Fidelity>> parse_slot(std::string_view s) {
  if (s == "n/a") return std::optional<Fidelity>{};
  if (s == "native") return std::optional<Fidelity>{Fidelity::native};
  if (s == "transcoded") return std::optional<Fidelity>{Fidelity::transcoded};
  return std::nullopt;
}

}  // namespace

std::string FidelityProfile::key() const {
  std::string out(slot(voice));
  out += '|';
  out += slot(image);
  return out;
}

std::optional<FidelityProfile> FidelityProfile::parse(std::string_view key) {
  const auto bar = key.find('|');
  if (bar == std::string_view::npos) return std::nullopt;
  auto v = parse_slot(key.substr(0, bar));
  auto i = parse_slot(key.substr(bar + 1));
  if (!v || !i) return std::nullopt;
  return FidelityProfile{*v, *i};
}

const std::vector<std::string>& reference_input_modes(AgentKind kind) {
  static const std::vector<std::string> voice = {"audio/wav", "audio/webm"};
  static const std::vector<std::string> vision = {"image/png", "image/jpeg"};
  static const std::vector<std::string> text = {"text/plain"};
  switch (kind) {
    case AgentKind::voice: return voice;
    case AgentKind::vision: return vision;
    case AgentKind::text: return text;
  }
  return text;
}

AgentCard reference_card(AgentKind kind, std::string url) {
  AgentCard card;
  card.url = std::move(url);
  switch (kind) {
    case AgentKind::voice:
      card.name = "voice-agent";
      card.description = "Transcription, sentiment and urgency analysis of customer audio";
      card.skills.push_back({"voice-analysis", "Voice analysis", reference_input_modes(kind), {"text/plain", "application/json"}});
      break;
    case AgentKind::vision:
      card.name = "vision-agent";
      card.description = "Visual inspection, defect detection and product identification";
      card.skills.push_back({"visual-inspection", "Visual inspection", reference_input_modes(kind), {"text/plain", "application/json"}});
      break;
    case AgentKind::text:
      card.name = "text-agent";
      card.description = "Knowledge-base lookup, warranty policy and final decision synthesis";
      card.skills.push_back({"decision-synthesis", "Decision synthesis", reference_input_modes(kind), {"text/plain", "application/json"}});
      break;
  }
  return card;
}

}  // namespace mma2a
