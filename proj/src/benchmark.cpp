#include "mma2a/benchmark.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mma2a/card_registry.hpp"
#include "mma2a/error.hpp"
#include "mma2a/media.hpp"

namespace mma2a {

namespace fs = std::filesystem;

std::size_t reference_category_size(Category c) noexcept {
  switch (c) {
    case Category::product_defect: return 13;
    case Category::assembly_guidance: return 12;
    case Category::visual_troubleshooting: return 12;
    case Category::warranty_claim: return 13;
  }
  return 0;
}

AgentKind TaskPart::destination() const { return route_to.value_or(default_agent_for(part_modality(part))); }

std::vector<Part> BenchmarkTask::message_parts() const {
  std::vector<Part> out;
  out.reserve(parts.size());
  for (const auto& p : parts) out.push_back(p.part);
  return out;
}

bool BenchmarkTask::has_modality(Modality m) const {
  return std::any_of(parts.begin(), parts.end(), [&](const TaskPart& p) { return part_modality(p.part) == m; });
}

const Product* KnowledgeBase::product(std::string_view id) const {
  for (const auto& p : products) {
    if (p.product_id == id) return &p;
  }
  return nullptr;
}

std::string KnowledgeBase::context_for(const BenchmarkTask& task) const {
  std::string out;
  if (const auto* p = product(task.product_id)) {
    out = "product " + p->product_id + " (" + p->name + "), warranty " + std::to_string(p->warranty_months) +
          " months: " + p->warranty_terms;
    if (!p->exclusions.empty()) {
      out += "; exclusions:";
      for (const auto& e : p->exclusions) out += " " + e + ";";
    }
  }
  return out;
}

KnowledgeBase kb_from_json(const Json& j) {
  try {
    KnowledgeBase kb;
    for (const auto& p : j.at("products")) {
      Product prod;
      prod.product_id = p.at("product_id").get<std::string>();
      prod.name = p.at("name").get<std::string>();
      prod.warranty_months = p.at("warranty_months").get<int>();
      prod.warranty_terms = p.value("warranty_terms", std::string());
      prod.exclusions = p.value("exclusions", std::vector<std::string>{});
      kb.products.push_back(std::move(prod));
    }
    for (const auto& t : j.at("troubleshooting")) {
      TroubleshootingEntry e;
      e.entry_id = t.at("entry_id").get<std::string>();
      e.symptom = t.at("symptom").get<std::string>();
      const auto res = t.at("resolution").get<std::string>();
      auto action = parse_action(res);
      if (!action) throw Error(ErrorCode::manifest_parse_error, "troubleshooting " + e.entry_id + ": unknown action " + res);
      e.resolution = *action;
      kb.troubleshooting.push_back(std::move(e));
    }
    return kb;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::manifest_parse_error, std::string("knowledge base: ") + ex.what());
  }
}

Json kb_to_json(const KnowledgeBase& kb) {
  Json j{{"schema_version", kManifestSchemaVersion}, {"products", Json::array()}, {"troubleshooting", Json::array()}};
  for (const auto& p : kb.products) {
    j["products"].push_back({{"product_id", p.product_id},
                             {"name", p.name},
                             {"warranty_months", p.warranty_months},
                             {"warranty_terms", p.warranty_terms},
                             {"exclusions", p.exclusions}});
  }
  for (const auto& t : kb.troubleshooting) {
    j["troubleshooting"].push_back(
        {{"entry_id", t.entry_id}, {"symptom", t.symptom}, {"resolution", to_string(t.resolution)}});
  }
  return j;
}

FixtureStore Benchmark::fixtures() const {
  FixtureStore out;
  for (const auto& t : tasks) out.emplace(t.task_id, t.fixture);
  return out;
}

const BenchmarkTask* Benchmark::find(std::string_view task_id) const {
  for (const auto& t : tasks) {
    if (t.task_id == task_id) return &t;
  }
  return nullptr;
}

namespace {

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::manifest_parse_error, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::manifest_parse_error, path.string() + ": " + e.what());
  }
}

std::optional<Bytes> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Bytes synth_media(const std::string& mime, const std::string& text, const std::string& seed_key, std::size_t min_size) {
  if (mime.starts_with("audio/")) return media::make_wav(text, min_size);
  return media::make_png(text, fnv1a(seed_key), min_size);
}

// Manifest parsing keeps going after content problems so that every violation
// is reported at once; only unreadable input is fatal here.
class TaskParser {
 public:
  TaskParser(const fs::path& root, const LoadOptions& opts, std::vector<std::string>& violations)
      : root_(root), opts_(opts), violations_(violations) {}

  BenchmarkTask parse(const Json& j, std::size_t index) {
    BenchmarkTask t;
    where_ = "task #" + std::to_string(index);
    if (!j.is_object()) {
      bad("not an object");
      return t;
    }
    t.task_id = str(j, "task_id");
    if (!t.task_id.empty()) where_ = t.task_id;
    t.fixture.task_id = t.task_id;

    const auto cat = str(j, "category");
    if (auto c = parse_category(cat)) {
      t.category = *c;
    } else {
      bad("unknown category '" + cat + "'");
    }
    const auto gt = str(j, "ground_truth");
    if (auto a = parse_action(gt)) {
      t.ground_truth = *a;
    } else {
      bad("ground_truth '" + gt + "' is not one of the 8 action labels");
    }
    if (j.contains("priority")) {
      if (j["priority"].is_number_integer()) {
        t.priority.level = j["priority"].get<int>();
      } else {
        bad("priority must be an integer");
      }
    }
    t.product_id = j.value("product_id", std::string());

    if (!j.contains("parts") || !j["parts"].is_array() || j["parts"].empty()) {
      bad("parts must be a non-empty array");
    } else {
      for (std::size_t i = 0; i < j["parts"].size(); ++i) parse_part(t, j["parts"][i], i);
    }

    if (j.contains("fixtures")) parse_fixtures(t, j["fixtures"]);
    if (j.contains("error_label")) {
      const auto& e = j["error_label"];
      if (e.is_object() && e.contains("failure_mode") && e["failure_mode"].is_string()) {
        t.error_label = ErrorLabel{e["failure_mode"].get<std::string>(), e.value("layer", std::string())};
      } else {
        bad("error_label needs a failure_mode string");
      }
    }
    return t;
  }

 private:
  void bad(const std::string& msg) { violations_.push_back(where_ + ": " + msg); }

  std::string str(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      bad(std::string("missing string field '") + key + "'");
      return {};
    }
    return j[key].get<std::string>();
  }

  void parse_part(BenchmarkTask& t, const Json& j, std::size_t i) {
    const std::string at = "part " + std::to_string(i) + ": ";
    if (!j.is_object()) {
      bad(at + "not an object");
      return;
    }
    TaskPart tp;
    if (j.contains("route_to")) {
      auto dest = j["route_to"].is_string() ? parse_agent_kind(j["route_to"].get<std::string>()) : std::nullopt;
      if (!dest) {
        bad(at + "route_to must be voice, vision or text");
      } else {
        tp.route_to = dest;
      }
    }
    const auto kind = j.value("kind", std::string());
    if (kind == "text") {
      if (!j.contains("text") || !j["text"].is_string()) {
        bad(at + "text part without text");
        return;
      }
      tp.part = make_text_part(j["text"].get<std::string>());
    } else if (kind == "data") {
      tp.part = make_data_part(j.value("data", Json::object()));
    } else if (kind == "file") {
      const auto mime = j.value("mimeType", std::string());
      if (!is_valid_mime(mime) || (!mime.starts_with("audio/") && !mime.starts_with("image/"))) {
        bad(at + "file parts must declare an audio/* or image/* mimeType, got '" + mime + "'");
        return;
      }
      const char* text_key = mime.starts_with("audio/") ? "transcript" : "caption";
      if (!j.contains(text_key) || !j[text_key].is_string()) {
        bad(at + "missing " + text_key);
        return;
      }
      tp.embedded_text = j[text_key].get<std::string>();
      tp.min_size = j.value("min_size", std::size_t{0});
      if (!j.contains("media") || !j["media"].is_string()) {
        bad(at + "missing media path");
        return;
      }
      tp.media = j["media"].get<std::string>();
      const fs::path file = root_ / *tp.media;
      Bytes bytes;
      if (!fs::exists(file)) {
        if (opts_.require_media) bad(at + "media file " + tp.media.value() + " is missing");
      } else if (opts_.load_media) {
        bytes = read_bytes(file).value_or(Bytes{});
        const auto embedded = media::embedded_text(mime, bytes);
        if (!embedded) {
          bad(at + tp.media.value() + " is not a valid " + mime + " placeholder");
        } else if (*embedded != *tp.embedded_text) {
          bad(at + tp.media.value() + " embeds different text than the manifest; regenerate media");
        }
      }
      if (bytes.empty()) bytes = synth_media(mime, *tp.embedded_text, t.task_id + "#" + std::to_string(i), tp.min_size);
      tp.part = make_file_part(mime, std::move(bytes), fs::path(*tp.media).filename().string());
    } else {
      bad(at + "unknown part kind '" + kind + "'");
      return;
    }
    t.parts.push_back(std::move(tp));
  }

  void parse_agent_text_map(const Json& j, std::map<AgentKind, std::string>& out, const char* field) {
    if (!j.is_object()) {
      bad(std::string(field) + " must be an object");
      return;
    }
    for (const auto& [k, v] : j.items()) {
      auto kind = parse_agent_kind(k);
      if (!kind || !v.is_string()) {
        bad(std::string(field) + ": bad entry '" + k + "'");
        continue;
      }
      out[*kind] = v.get<std::string>();
    }
  }

  void parse_fixtures(BenchmarkTask& t, const Json& j) {
    if (!j.is_object()) {
      bad("fixtures must be an object");
      return;
    }
    if (j.contains("native_summary")) parse_agent_text_map(j["native_summary"], t.fixture.native_summary, "native_summary");
    if (j.contains("transcoded_summary")) {
      parse_agent_text_map(j["transcoded_summary"], t.fixture.transcoded_summary, "transcoded_summary");
    }
    if (j.contains("structured") && j["structured"].is_object()) {
      for (const auto& [k, v] : j["structured"].items()) {
        auto kind = parse_agent_kind(k);
        if (!kind || !v.is_object()) {
          bad("structured: bad entry '" + k + "'");
          continue;
        }
        for (const auto& [field, value] : v.items()) {
          t.fixture.structured[*kind][field] = value.is_string() ? value.get<std::string>() : value.dump();
        }
      }
    }
    if (j.contains("scripted_decision")) {
      const auto& sd = j["scripted_decision"];
      if (!sd.is_object()) {
        bad("scripted_decision must be an object");
        return;
      }
      for (const auto& [key, v] : sd.items()) {
        if (!FidelityProfile::parse(key)) {
          bad("scripted_decision: bad profile key '" + key + "'");
          continue;
        }
        auto action = v.is_string() ? parse_action(v.get<std::string>()) : std::nullopt;
        if (!action) {
          bad("scripted_decision[" + key + "] is not one of the 8 action labels");
          continue;
        }
        t.fixture.scripted_decision[key] = *action;
      }
    }
  }

  const fs::path& root_;
  const LoadOptions& opts_;
  std::vector<std::string>& violations_;
  std::string where_;
};

std::set<Modality> required_modalities(Category c) {
  switch (c) {
    case Category::product_defect:
    case Category::warranty_claim: return {Modality::voice, Modality::image, Modality::text};
    case Category::assembly_guidance: return {Modality::voice, Modality::text};
    case Category::visual_troubleshooting: return {Modality::image, Modality::text};
  }
  return {};
}

}  // namespace

FidelityProfile predicted_profile(const BenchmarkTask& task, const RoutingMode& mode) {
  std::map<AgentKind, std::optional<Fidelity>> seen;
  for (const auto& tp : task.parts) {
    const AgentKind dest = tp.destination();
    if (dest == AgentKind::text) continue;
    auto& slot = seen[dest];
    if (!slot) slot = Fidelity::transcoded;
    const Modality m = part_modality(tp.part);
    const bool capable = capability_accepts(capability_set(reference_card(dest, "http://localhost")), representative_mime(tp.part));
    const bool native_media =
        (dest == AgentKind::voice && m == Modality::voice) || (dest == AgentKind::vision && m == Modality::image);
    if (native_media && decide_route(m, capable, mode, task.priority) == RouteOutcome::native) slot = Fidelity::native;
  }
  FidelityProfile p;
  if (seen.contains(AgentKind::voice)) p.voice = seen[AgentKind::voice];
  if (seen.contains(AgentKind::vision)) p.image = seen[AgentKind::vision];
  return p;
}

std::vector<std::string> validate_benchmark(const Benchmark& bench, const LoadOptions& options) {
  std::vector<std::string> out;
  std::set<std::string> ids;
  std::map<Category, std::size_t> counts;
  for (const auto& t : bench.tasks) {
    if (!t.task_id.empty() && !ids.insert(t.task_id).second) out.push_back(t.task_id + ": duplicate task_id");
    ++counts[t.category];
    if (t.parts.empty()) continue;

    std::set<Modality> present;
    for (const auto& p : t.parts) {
      const auto m = part_modality(p.part);
      if (m != Modality::data) present.insert(m);
    }
    if (present != required_modalities(t.category)) {
      std::string have;
      for (auto m : present) have += std::string(have.empty() ? "" : "+") + std::string(to_string(m));
      out.push_back(t.task_id + ": modalities {" + have + "} do not match category " + std::string(to_string(t.category)));
    }
    if (!bench.kb.product(t.product_id)) out.push_back(t.task_id + ": unknown product_id '" + t.product_id + "'");
    if (t.priority.level < 0) out.push_back(t.task_id + ": negative priority");

    for (const auto& mode : {RoutingMode::native(), RoutingMode::text_bottleneck()}) {
      const auto key = predicted_profile(t, mode).key();
      if (!t.fixture.scripted_decision.contains(key)) {
        out.push_back(t.task_id + ": no scripted_decision for profile " + key + " (reachable in " +
                      std::string(mode.name()) + " mode)");
      }
    }
  }
  if (options.reference_counts) {
    std::size_t total = 0;
    for (auto c : kAllCategories) {
      total += counts[c];
      if (counts[c] != reference_category_size(c)) {
        out.push_back("category " + std::string(to_string(c)) + " has " + std::to_string(counts[c]) + " tasks, expected " +
                      std::to_string(reference_category_size(c)));
      }
    }
    if (total != 50) out.push_back("benchmark has " + std::to_string(total) + " tasks, expected 50");
    if (bench.kb.products.size() != 15) {
      out.push_back("knowledge base has " + std::to_string(bench.kb.products.size()) + " products, expected 15");
    }
    if (bench.kb.troubleshooting.size() != 10) {
      out.push_back("knowledge base has " + std::to_string(bench.kb.troubleshooting.size()) +
                    " troubleshooting entries, expected 10");
    }
  }
  return out;
}

Benchmark load_manifest(const fs::path& path, const LoadOptions& options) {
  const Json j = read_json_file(path);
  if (!j.is_object()) throw Error(ErrorCode::manifest_parse_error, path.string() + ": top level must be an object");

  Benchmark bench;
  bench.manifest_path = path;
  bench.root = path.parent_path();
  std::vector<std::string> violations;

  if (j.value("schema_version", -1) != kManifestSchemaVersion) {
    violations.push_back("schema_version must be " + std::to_string(kManifestSchemaVersion));
  }
  if (j.contains("knowledge_base")) {
    const Json& kb = j["knowledge_base"];
    bench.kb = kb.is_string() ? kb_from_json(read_json_file(bench.root / kb.get<std::string>())) : kb_from_json(kb);
  } else {
    violations.push_back("missing knowledge_base");
  }
  if (j.contains("keyword_rules") && j["keyword_rules"].is_string()) {
    bench.keyword_rules = bench.root / j["keyword_rules"].get<std::string>();
    if (!fs::exists(*bench.keyword_rules)) violations.push_back("keyword rule file " + bench.keyword_rules->string() + " is missing");
  }
  if (!j.contains("tasks") || !j["tasks"].is_array()) {
    throw Error(ErrorCode::manifest_parse_error, path.string() + ": tasks must be an array");
  }
  TaskParser parser(bench.root, options, violations);
  for (std::size_t i = 0; i < j["tasks"].size(); ++i) bench.tasks.push_back(parser.parse(j["tasks"][i], i));

  auto more = validate_benchmark(bench, options);
  violations.insert(violations.end(), more.begin(), more.end());
  if (!violations.empty()) {
    std::string msg = std::to_string(violations.size()) + " manifest violation(s):";
    for (const auto& v : violations) msg += "\n  " + v;
    throw Error(ErrorCode::invariant_violation, msg);
  }
  return bench;
}

bool score(const ActionDecision& decision, const BenchmarkTask& task) noexcept {
  return decision.action == task.ground_truth;
}

std::map<std::size_t, Bytes> generate_synthetic_media(const BenchmarkTask& task, std::size_t min_size) {
  std::map<std::size_t, Bytes> out;
  for (std::size_t i = 0; i < task.parts.size(); ++i) {
    const auto& tp = task.parts[i];
    const auto* f = std::get_if<FilePart>(&tp.part);
    if (!f || !tp.embedded_text) continue;
    out[i] = synth_media(f->mime_type, *tp.embedded_text, task.task_id + "#" + std::to_string(i),
                         min_size ? min_size : tp.min_size);
  }
  return out;
}

}  // namespace mma2a
