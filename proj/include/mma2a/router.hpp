#pragma once

// Modality-aware router: per-part native-vs-transcode decisions against the
// destination's Agent Card, the mock transcoders, the URI blob store and the
// routing telemetry log.

#include <chrono>
#include <climits>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mma2a/a2a.hpp"
#include "mma2a/card_registry.hpp"

namespace mma2a {

struct TaskPriority {
  int level = 0;
  auto operator<=>(const TaskPriority&) const = default;
};

inline constexpr int kThetaInfinity = INT_MAX;

struct RoutingMode {
  enum class Kind { native, text_bottleneck, adaptive };

  Kind kind = Kind::native;
  int theta = 0;  // priority threshold, adaptive only

  static RoutingMode native() { return {Kind::native, 0}; }
  static RoutingMode text_bottleneck() { return {Kind::text_bottleneck, 0}; }
  static RoutingMode adaptive(int theta) { return {Kind::adaptive, theta}; }

  /// "native", "text_bottleneck" or "adaptive".
  std::string_view name() const noexcept;
  bool operator==(const RoutingMode&) const = default;
};

std::optional<RoutingMode> parse_routing_mode(std::string_view name, int theta = 0);

enum class RouteOutcome { native, transcoded };
enum class TranscoderKind { speech_to_text, image_caption };

std::string_view to_string(RouteOutcome o) noexcept;
std::string_view to_string(TranscoderKind k) noexcept;

/// The routing case split. `capable` is whether the part's MIME is in the
/// destination's capability set.
///  - data parts are never transcoded;
///  - text parts follow the capability check in every mode (the "transcode"
///    of a text part is the identity);
///  - voice/image: native mode forwards iff capable, text_bottleneck always
///    transcodes, adaptive forwards iff capable and priority >= theta.
RouteOutcome decide_route(Modality modality, bool capable, const RoutingMode& mode, TaskPriority priority) noexcept;

struct RoutingDecision {
  std::string task_id;
  Modality part_modality = Modality::text;
  std::string destination;
  RouteOutcome outcome = RouteOutcome::native;
  std::optional<TranscoderKind> transcoder_used;
  std::int64_t decided_at_us = 0;  // system clock, microseconds since epoch
  std::chrono::nanoseconds decision_latency{0};
};

Json decision_to_json(const RoutingDecision& d);
RoutingDecision decision_from_json(const Json& j);

/// Appended to the content of every transcoded voice/image part.
inline constexpr std::string_view kTranscodedMarker = "[fidelity=transcoded]";

class Transcoder {
 public:
  virtual ~Transcoder() = default;
  virtual TranscoderKind kind() const noexcept = 0;
  /// Returns a text part; throws transcoder_failure.
  virtual Part transcode(const FilePart& part, std::span<const std::uint8_t> payload) const = 0;
};

/// Emits the transcript embedded in the WAV plus the fidelity marker.
class MockSpeechToText final : public Transcoder {
 public:
  TranscoderKind kind() const noexcept override { return TranscoderKind::speech_to_text; }
  Part transcode(const FilePart& part, std::span<const std::uint8_t> payload) const override;
};

/// Emits the caption embedded in the PNG plus the fidelity marker.
class MockImageCaptioner final : public Transcoder {
 public:
  TranscoderKind kind() const noexcept override { return TranscoderKind::image_caption; }
  Part transcode(const FilePart& part, std::span<const std::uint8_t> payload) const override;
};

std::string sha256_hex(std::span<const std::uint8_t> bytes);

/// Content-addressed directory of large payloads, served by the router at
/// `<base_url>/blobs/<sha256>`.
class BlobStore {
 public:
  BlobStore(std::filesystem::path dir, std::string base_url);

  /// Stores the bytes and returns their URI. Throws blob_store_failure.
  std::string put(std::span<const std::uint8_t> bytes);
  std::optional<Bytes> get(std::string_view hash) const;
  /// Local read when the URI points at this store, HTTP GET otherwise.
  Bytes resolve(const std::string& uri) const;

  void set_base_url(std::string base_url);
  std::string base_url() const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::string base_url_;
};

/// Inline payloads up to kMaxInlineBytes stay inline; larger ones move to the
/// blob store and are replaced by a URI reference.
Part encode_for_wire(const Part& part, BlobStore& blobs);

/// Append-only, totally ordered log of routing decisions.
class RoutingTelemetry {
 public:
  void append(RoutingDecision decision);
  std::vector<RoutingDecision> snapshot() const;
  std::vector<RoutingDecision> for_task(std::string_view task_id) const;
  std::size_t size() const;
  void write_jsonl(const std::filesystem::path& path) const;
  static std::vector<RoutingDecision> read_jsonl(const std::filesystem::path& path);

 private:
  mutable std::mutex mutex_;
  std::vector<RoutingDecision> log_;
};

struct RoutedPart {
  Part part;
  RoutingDecision decision;
};

class ModalityRouter {
 public:
  ModalityRouter(std::shared_ptr<CardRegistry> registry, RoutingMode mode, std::shared_ptr<RoutingTelemetry> telemetry,
                 std::shared_ptr<const BlobStore> blobs = nullptr);

  /// Routes one part and appends exactly one decision to the telemetry.
  /// Throws card_unavailable or transcoder_failure.
  RoutedPart route(const Part& part, const std::string& destination, TaskPriority priority,
                   std::string_view task_id);

  const RoutingMode& mode() const noexcept { return mode_; }
  RoutingTelemetry& telemetry() noexcept { return *telemetry_; }
  CardRegistry& registry() noexcept { return *registry_; }

 private:
  std::shared_ptr<CardRegistry> registry_;
  const RoutingMode mode_;
  std::shared_ptr<RoutingTelemetry> telemetry_;
  std::shared_ptr<const BlobStore> blobs_;
  MockSpeechToText speech_to_text_;
  MockImageCaptioner captioner_;
};

struct OutcomeCounts {
  std::size_t native = 0;
  std::size_t transcoded = 0;
  std::size_t total() const noexcept { return native + transcoded; }
  bool operator==(const OutcomeCounts&) const = default;
};

struct RoutingProfile {
  std::map<Modality, OutcomeCounts> by_modality;

  OutcomeCounts at(Modality m) const;
  OutcomeCounts totals() const;
  double native_fraction() const;
};

RoutingProfile routing_profile(std::span<const RoutingDecision> decisions);

}  // namespace mma2a
