#include "mma2a/router.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "mma2a/error.hpp"
#include "mma2a/http.hpp"
#include "mma2a/media.hpp"

namespace mma2a {
namespace {

std::int64_t now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Part with_marker(std::string text) {
  text += ' ';
  text += kTranscodedMarker;
  return make_text_part(std::move(text));
}

Part transcode_embedded(const FilePart& part, std::span<const std::uint8_t> payload, std::string_view what) {
  auto text = media::embedded_text(part.mime_type, payload);
  if (!text) throw Error(ErrorCode::transcoder_failure, std::string(what) + ": no embedded text in " + part.mime_type);
  return with_marker(std::move(*text));
}

}  // namespace

std::string_view RoutingMode::name() const noexcept {
  switch (kind) {
    case Kind::native: return "native";
    case Kind::text_bottleneck: return "text_bottleneck";
    case Kind::adaptive: return "adaptive";
  }
  return "native";
}

std::optional<RoutingMode> parse_routing_mode(std::string_view name, int theta) {
  if (name == "native" || name == "mma2a") return RoutingMode::native();
  if (name == "text_bottleneck" || name == "text-bn") return RoutingMode::text_bottleneck();
  if (name == "adaptive") return RoutingMode::adaptive(theta);
  return std::nullopt;
}

std::string_view to_string(RouteOutcome o) noexcept { return o == RouteOutcome::native ? "native" : "transcoded"; }

std::string_view to_string(TranscoderKind k) noexcept {
  return k == TranscoderKind::speech_to_text ? "speech_to_text" : "image_caption";
}

RouteOutcome decide_route(Modality modality, bool capable, const RoutingMode& mode, TaskPriority priority) noexcept {
  switch (modality) {
    case Modality::data:
      return RouteOutcome::native;
    case Modality::text:
      return capable ? RouteOutcome::native : RouteOutcome::transcoded;
    case Modality::voice:
    case Modality::image:
      break;
  }
  switch (mode.kind) {
    case RoutingMode::Kind::native:
      return capable ? RouteOutcome::native : RouteOutcome::transcoded;
    case RoutingMode::Kind::text_bottleneck:
      return RouteOutcome::transcoded;
    case RoutingMode::Kind::adaptive:
      return capable && priority.level >= mode.theta ? RouteOutcome::native : RouteOutcome::transcoded;
  }
  return RouteOutcome::transcoded;
}

Json decision_to_json(const RoutingDecision& d) {
  Json j{{"task_id", d.task_id},
         {"part_modality", to_string(d.part_modality)},
         {"destination_agent", d.destination},
         {"outcome", to_string(d.outcome)},
         {"decided_at_us", d.decided_at_us},
         {"decision_latency_ns", d.decision_latency.count()}};
  j["transcoder_used"] = d.transcoder_used ? Json(to_string(*d.transcoder_used)) : Json();
  return j;
}

RoutingDecision decision_from_json(const Json& j) {
  try {
    RoutingDecision d;
    d.task_id = j.at("task_id").get<std::string>();
    auto modality = parse_modality(j.at("part_modality").get<std::string>());
    if (!modality) throw Error(ErrorCode::structural, "unknown modality in routing decision");
    d.part_modality = *modality;
    d.destination = j.at("destination_agent").get<std::string>();
    d.outcome = j.at("outcome").get<std::string>() == "native" ? RouteOutcome::native : RouteOutcome::transcoded;
    if (const auto& t = j.at("transcoder_used"); t.is_string()) {
      d.transcoder_used = t == "speech_to_text" ? TranscoderKind::speech_to_text : TranscoderKind::image_caption;
    }
    d.decided_at_us = j.value("decided_at_us", std::int64_t{0});
    d.decision_latency = std::chrono::nanoseconds(j.value("decision_latency_ns", std::int64_t{0}));
    return d;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::structural, std::string("routing decision: ") + e.what());
  }
}

Part MockSpeechToText::transcode(const FilePart& part, std::span<const std::uint8_t> payload) const {
  return transcode_embedded(part, payload, "speech-to-text");
}

Part MockImageCaptioner::transcode(const FilePart& part, std::span<const std::uint8_t> payload) const {
  return transcode_embedded(part, payload, "image caption");
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::blob_store_failure, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

BlobStore::BlobStore(std::filesystem::path dir, std::string base_url)
    : dir_(std::move(dir)), base_url_(std::move(base_url)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::blob_store_failure, "cannot create " + dir_.string() + ": " + ec.message());
}

std::string BlobStore::put(std::span<const std::uint8_t> bytes) {
  const std::string hash = sha256_hex(bytes);
  const auto path = dir_ / hash;
  std::lock_guard lock(mutex_);
  if (!std::filesystem::exists(path)) {
    const auto tmp = dir_ / (hash + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw Error(ErrorCode::blob_store_failure, "cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::blob_store_failure, "cannot publish " + path.string() + ": " + ec.message());
  }
  return base_url_ + "/blobs/" + hash;
}

std::optional<Bytes> BlobStore::get(std::string_view hash) const {
  if (hash.size() != 64 || hash.find_first_not_of("0123456789abcdef") != std::string_view::npos) return std::nullopt;
  std::ifstream in(dir_ / std::string(hash), std::ios::binary);
  if (!in) return std::nullopt;
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

Bytes BlobStore::resolve(const std::string& uri) const {
  const std::string prefix = base_url() + "/blobs/";
  if (uri.rfind(prefix, 0) == 0) {
    if (auto bytes = get(std::string_view(uri).substr(prefix.size()))) return std::move(*bytes);
    throw Error(ErrorCode::blob_store_failure, "unknown blob " + uri);
  }
  const HttpResponse res = http_get(uri);
  if (res.status != 200) throw Error(ErrorCode::blob_store_failure, uri + " returned " + std::to_string(res.status));
  return Bytes(res.body.begin(), res.body.end());
}

void BlobStore::set_base_url(std::string base_url) {
  std::lock_guard lock(mutex_);
  base_url_ = std::move(base_url);
}

std::string BlobStore::base_url() const {
  std::lock_guard lock(mutex_);
  return base_url_;
}

Part encode_for_wire(const Part& part, BlobStore& blobs) {
  const auto* file = std::get_if<FilePart>(&part);
  if (!file || !file->is_inline() || file->bytes().size() <= kMaxInlineBytes) return part;
  return FilePart{file->mime_type, UriRef{blobs.put(file->bytes())}, file->name};
}

void RoutingTelemetry::append(RoutingDecision decision) {
  std::lock_guard lock(mutex_);
  log_.push_back(std::move(decision));
}

std::vector<RoutingDecision> RoutingTelemetry::snapshot() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::vector<RoutingDecision> RoutingTelemetry::for_task(std::string_view task_id) const {
  std::lock_guard lock(mutex_);
  std::vector<RoutingDecision> out;
  for (const auto& d : log_) {
    if (d.task_id == task_id) out.push_back(d);
  }
  return out;
}

std::size_t RoutingTelemetry::size() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

void RoutingTelemetry::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path);
  for (const auto& d : snapshot()) out << decision_to_json(d).dump() << '\n';
  if (!out) throw Error(ErrorCode::config_error, "cannot write " + path.string());
}

std::vector<RoutingDecision> RoutingTelemetry::read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot read " + path.string());
  std::vector<RoutingDecision> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(decision_from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::malformed_json, path.string() + ": " + e.what());
    }
  }
  return out;
}

ModalityRouter::ModalityRouter(std::shared_ptr<CardRegistry> registry, RoutingMode mode,
                               std::shared_ptr<RoutingTelemetry> telemetry, std::shared_ptr<const BlobStore> blobs)
    : registry_(std::move(registry)), mode_(mode), telemetry_(std::move(telemetry)), blobs_(std::move(blobs)) {}

RoutedPart ModalityRouter::route(const Part& part, const std::string& destination, TaskPriority priority,
                                 std::string_view task_id) {
  const auto start = std::chrono::steady_clock::now();
  const Modality modality = part_modality(part);

  std::shared_ptr<const CachedCard> card;
  try {
    card = registry_->lookup(destination);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::card_unavailable, destination + ": " + e.what());
  }
  const bool capable = capability_accepts(card->capabilities, representative_mime(part));
  const RouteOutcome outcome = decide_route(modality, capable, mode_, priority);

  RoutedPart routed{part, {}};
  std::optional<TranscoderKind> used;
  if (outcome == RouteOutcome::transcoded && (modality == Modality::voice || modality == Modality::image)) {
    const auto& file = std::get<FilePart>(part);
    const Transcoder& transcoder =
        modality == Modality::voice ? static_cast<const Transcoder&>(speech_to_text_) : captioner_;
    Bytes fetched;
    std::span<const std::uint8_t> payload;
    if (file.is_inline()) {
      payload = file.bytes();
    } else {
      if (!blobs_) throw Error(ErrorCode::transcoder_failure, "no blob store to resolve " + file.uri());
      try {
        fetched = blobs_->resolve(file.uri());
      } catch (const Error& e) {
        throw Error(ErrorCode::transcoder_failure, e.what());
      }
      payload = fetched;
    }
    routed.part = transcoder.transcode(file, payload);
    used = transcoder.kind();
  }

  routed.decision = RoutingDecision{std::string(task_id),
                                    modality,
                                    destination,
                                    outcome,
                                    used,
                                    now_us(),
                                    std::chrono::duration_cast<std::chrono::nanoseconds>(
                                        std::chrono::steady_clock::now() - start)};
  telemetry_->append(routed.decision);
  return routed;
}

OutcomeCounts RoutingProfile::at(Modality m) const {
  auto it = by_modality.find(m);
  return it == by_modality.end() ? OutcomeCounts{} : it->second;
}

OutcomeCounts RoutingProfile::totals() const {
  OutcomeCounts sum;
  for (const auto& [m, c] : by_modality) {
    sum.native += c.native;
    sum.transcoded += c.transcoded;
  }
  return sum;
}

double RoutingProfile::native_fraction() const {
  const auto t = totals();
  return t.total() == 0 ? 0.0 : static_cast<double>(t.native) / static_cast<double>(t.total());
}

RoutingProfile routing_profile(std::span<const RoutingDecision> decisions) {
  RoutingProfile profile;
  for (const auto& d : decisions) {
    auto& counts = profile.by_modality[d.part_modality];
    if (d.outcome == RouteOutcome::native) {
      ++counts.native;
    } else {
      ++counts.transcoded;
    }
  }
  return profile;
}

}  // namespace mma2a
