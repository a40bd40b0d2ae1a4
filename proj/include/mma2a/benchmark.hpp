#pragma once

// CrossModal-CS: task manifest, knowledge base, fixtures and validation.
// File formats are described in BENCHMARK_FORMAT.md.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mma2a/a2a.hpp"
#include "mma2a/agents.hpp"
#include "mma2a/domain.hpp"
#include "mma2a/router.hpp"

namespace mma2a {

inline constexpr int kManifestSchemaVersion = 1;

/// Required category sizes of the shipped benchmark.
std::size_t reference_category_size(Category c) noexcept;

struct TaskPart {
  Part part;
  /// Overrides the default destination for this part's modality.
  std::optional<AgentKind> route_to;
  /// Manifest-relative media path for file parts.
  std::optional<std::string> media;
  /// Transcript (audio) or caption (image) embedded in the media.
  std::optional<std::string> embedded_text;
  /// Requested minimum media size, for payloads that straddle the inline limit.
  std::size_t min_size = 0;

  AgentKind destination() const;
};

struct ErrorLabel {
  std::string failure_mode;
  std::string layer;
};

struct BenchmarkTask {
  std::string task_id;
  Category category = Category::product_defect;
  TaskPriority priority;
  Action ground_truth = Action::escalate_to_specialist;
  std::string product_id;
  std::vector<TaskPart> parts;
  TaskFixture fixture;
  /// Operator-supplied failure classification for the native arm.
  std::optional<ErrorLabel> error_label;

  std::vector<Part> message_parts() const;
  bool has_modality(Modality m) const;
};

struct Product {
  std::string product_id;
  std::string name;
  int warranty_months = 0;
  std::string warranty_terms;
  std::vector<std::string> exclusions;
};

struct TroubleshootingEntry {
  std::string entry_id;
  std::string symptom;
  Action resolution = Action::troubleshoot_step;
};

struct KnowledgeBase {
  std::vector<Product> products;
  std::vector<TroubleshootingEntry> troubleshooting;

  const Product* product(std::string_view id) const;
  /// Compact text handed to the synthesis step.
  std::string context_for(const BenchmarkTask& task) const;
};

KnowledgeBase kb_from_json(const Json& j);
Json kb_to_json(const KnowledgeBase& kb);

struct Benchmark {
  std::filesystem::path root;  // directory of the manifest
  std::filesystem::path manifest_path;
  std::vector<BenchmarkTask> tasks;
  KnowledgeBase kb;
  std::optional<std::filesystem::path> keyword_rules;

  FixtureStore fixtures() const;
  const BenchmarkTask* find(std::string_view task_id) const;
};

struct LoadOptions {
  /// Enforce the 13/12/12/13 split and the 15/10 knowledge base.
  bool reference_counts = true;
  /// Read media bytes into the parts (otherwise only check presence).
  bool load_media = true;
  /// Missing media files are violations; when false they are synthesised.
  bool require_media = true;
};

/// Throws manifest_parse_error when a file cannot be read or parsed, and
/// invariant_violation listing every problem found otherwise.
Benchmark load_manifest(const std::filesystem::path& path, const LoadOptions& options = {});

/// All violations of a parsed benchmark; empty when valid.
std::vector<std::string> validate_benchmark(const Benchmark& bench, const LoadOptions& options = {});

/// The fidelity profile the synthesis step sees for `task` under `mode`,
/// computed from the reference agent capabilities alone.
FidelityProfile predicted_profile(const BenchmarkTask& task, const RoutingMode& mode);

bool score(const ActionDecision& decision, const BenchmarkTask& task) noexcept;

/// Placeholder media for every file part of the task, keyed by part index.
/// `min_size` overrides each part's own size request when nonzero.
std::map<std::size_t, Bytes> generate_synthetic_media(const BenchmarkTask& task, std::size_t min_size = 0);

}  // namespace mma2a
