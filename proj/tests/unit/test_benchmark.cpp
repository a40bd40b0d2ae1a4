#include <doctest.h>

#include <fstream>
#include <unistd.h>

#include "mma2a/benchmark.hpp"
#include "mma2a/error.hpp"
#include "mma2a/media.hpp"

using namespace mma2a;
namespace fs = std::filesystem;

namespace {

const fs::path kShipped = fs::path(MMA2A_SOURCE_DIR) / "data" / "crossmodal_cs";

Json shipped_manifest() {
  std::ifstream in(kShipped / "manifest.json");
  return Json::parse(in);
}

// Copies the knowledge base and rules next to a rewritten manifest. Media is
// left out, so these loads run with require_media = false unless a test wants
// the missing files reported.
fs::path write_variant(const Json& manifest, const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("mma2a-bench-" + std::to_string(getpid()) + "-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::copy_file(kShipped / "kb.json", dir / "kb.json");
  fs::copy_file(kShipped / "keyword_rules.txt", dir / "keyword_rules.txt");
  std::ofstream(dir / "manifest.json") << manifest.dump(2);
  return dir / "manifest.json";
}

LoadOptions no_media() {
  LoadOptions o;
  o.load_media = false;
  o.require_media = false;
  return o;
}

std::string violation_text(const fs::path& path, const LoadOptions& opts) {
  try {
    load_manifest(path, opts);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invariant_violation);
    return e.what();
  }
  FAIL("manifest loaded");
  return {};
}

}  // namespace

TEST_CASE("shipped benchmark loads") {
  const Benchmark b = load_manifest(kShipped / "manifest.json");
  CHECK(b.tasks.size() == 50);
  std::map<Category, std::size_t> counts;
  for (const auto& t : b.tasks) ++counts[t.category];
  for (auto c : kAllCategories) CHECK(counts[c] == reference_category_size(c));
  CHECK(b.kb.products.size() == 15);
  CHECK(b.kb.troubleshooting.size() == 10);
  REQUIRE(b.keyword_rules);
  CHECK(fs::exists(*b.keyword_rules));
  CHECK(b.fixtures().size() == 50);

  const auto* t = b.find("defect_001");
  REQUIRE(t);
  CHECK(t->has_modality(Modality::voice));
  CHECK(t->has_modality(Modality::image));
  // Loaded media carries the transcript it was generated from.
  for (const auto& tp : t->parts) {
    if (const auto* f = std::get_if<FilePart>(&tp.part); f && tp.embedded_text) {
      CHECK(media::embedded_text(f->mime_type, f->bytes()) == *tp.embedded_text);
    }
  }
  CHECK(b.find("nope") == nullptr);
}

TEST_CASE("knowledge base context names the product") {
  const Benchmark b = load_manifest(kShipped / "manifest.json", no_media());
  const auto& t = b.tasks.front();
  const auto* p = b.kb.product(t.product_id);
  REQUIRE(p);
  CHECK(b.kb.context_for(t).find(p->name) != std::string::npos);
  CHECK(kb_from_json(kb_to_json(b.kb)).products.size() == 15);
}

TEST_CASE("predicted profiles under both modes") {
  const Benchmark b = load_manifest(kShipped / "manifest.json", no_media());
  for (const auto& t : b.tasks) {
    const auto tbn = predicted_profile(t, RoutingMode::text_bottleneck());
    if (tbn.voice) CHECK(*tbn.voice == Fidelity::transcoded);
    if (tbn.image) CHECK(*tbn.image == Fidelity::transcoded);
    const auto nat = predicted_profile(t, RoutingMode::native());
    CHECK(nat.voice.has_value() == tbn.voice.has_value());
    CHECK(nat.image.has_value() == tbn.image.has_value());
    CHECK(t.fixture.scripted_decision.contains(nat.key()));
    CHECK(t.fixture.scripted_decision.contains(tbn.key()));
  }
  // Adaptive with an unreachable threshold behaves like the bottleneck.
  for (const auto& t : b.tasks) {
    CHECK(predicted_profile(t, RoutingMode::adaptive(kThetaInfinity)) == predicted_profile(t, RoutingMode::text_bottleneck()));
  }
}

TEST_CASE("synthetic media is deterministic per task and part") {
  const Benchmark b = load_manifest(kShipped / "manifest.json", no_media());
  const auto& t = b.tasks.front();
  const auto m1 = generate_synthetic_media(t);
  const auto m2 = generate_synthetic_media(t);
  CHECK(m1 == m2);
  CHECK_FALSE(m1.empty());
  const auto big = generate_synthetic_media(t, 2 * kMaxInlineBytes);
  for (const auto& [i, bytes] : big) CHECK(bytes.size() >= 2 * kMaxInlineBytes);
  CHECK(generate_synthetic_media(b.tasks[1]) != m1);
}

TEST_CASE("duplicate ids and bad labels are reported together") {
  Json m = shipped_manifest();
  m["tasks"][1]["task_id"] = m["tasks"][0]["task_id"];
  m["tasks"][2]["ground_truth"] = "refund_everything";
  const auto msg = violation_text(write_variant(m, "dup"), no_media());
  CHECK(msg.find("duplicate task_id") != std::string::npos);
  CHECK(msg.find("refund_everything") != std::string::npos);
}

TEST_CASE("category counts are enforced") {
  Json m = shipped_manifest();
  m["tasks"].erase(m["tasks"].size() - 1);
  const auto path = write_variant(m, "count");
  CHECK(violation_text(path, no_media()).find("expected 13") != std::string::npos);
  LoadOptions relaxed = no_media();
  relaxed.reference_counts = false;
  CHECK(load_manifest(path, relaxed).tasks.size() == 49);
}

TEST_CASE("missing media is a violation unless synthesised") {
  const Json m = shipped_manifest();
  const auto path = write_variant(m, "media");
  LoadOptions strict;
  strict.load_media = false;
  CHECK(violation_text(path, strict).find("media") != std::string::npos);
  CHECK(load_manifest(path, no_media()).tasks.size() == 50);
}

TEST_CASE("modalities must match the category") {
  Json m = shipped_manifest();
  Json& parts = m["tasks"][0]["parts"];
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].value("mimeType", "").rfind("image/", 0) == 0) {
      parts.erase(i);
      break;
    }
  }
  CHECK(violation_text(write_variant(m, "modality"), no_media()).find("do not match category") != std::string::npos);
}

TEST_CASE("unreadable manifests are parse errors") {
  try {
    load_manifest("/nonexistent/manifest.json");
    FAIL("loaded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::manifest_parse_error);
  }
  const fs::path dir = fs::temp_directory_path() / ("mma2a-bench-" + std::to_string(getpid()) + "-junk");
  fs::create_directories(dir);
  std::ofstream(dir / "manifest.json") << "{ not json";
  try {
    load_manifest(dir / "manifest.json");
    FAIL("loaded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::manifest_parse_error);
  }
}

TEST_CASE("scoring is exact label match") {
  const Benchmark b = load_manifest(kShipped / "manifest.json", no_media());
  const auto& t = b.tasks.front();
  CHECK(score(ActionDecision{t.ground_truth, 0.1, ""}, t));
  CHECK_FALSE(score(ActionDecision{t.ground_truth == Action::order_part ? Action::deny_warranty : Action::order_part, 1.0, ""}, t));
}
