#include <doctest.h>

#include <unistd.h>

#include "mma2a/error.hpp"
#include "mma2a/experiment.hpp"
#include "mma2a/orchestrator.hpp"

using namespace mma2a;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

const Benchmark& bench() {
  static const Benchmark b = [] {
    LoadOptions o;
    o.load_media = true;
    return load_manifest(fs::path(MMA2A_SOURCE_DIR) / "data" / "crossmodal_cs" / "manifest.json", o);
  }();
  return b;
}

fs::path scratch(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("mma2a-orch-" + std::to_string(getpid()) + "-" + tag);
  fs::remove_all(dir);
  return dir;
}

const BenchmarkTask& task_with(Category c) {
  for (const auto& t : bench().tasks) {
    if (t.category == c) return t;
  }
  throw std::logic_error("no task");
}

struct Rig {
  std::shared_ptr<const ReasoningBackend> backend;
  AgentMesh mesh;
  RouterNode router;
  Orchestrator orch;

  Rig(RoutingMode mode, const std::string& tag, MeshConfig mc = {}, OrchestratorConfig oc = {})
      : backend(make_backend(BackendKind::scripted, bench(), mc)),
        mesh(backend, mc),
        router(mode, scratch(tag)),
        orch(mesh.urls(), router.url(), std::string(mode.name()), &bench().kb, router.telemetry(), router.blobs(), oc) {}
};

}  // namespace

TEST_CASE("decomposition groups parts by destination") {
  const auto& t = task_with(Category::product_defect);
  const auto subs = decompose(t);
  REQUIRE(subs.size() == 3);
  CHECK(subs[0].destination == AgentKind::voice);
  CHECK(subs[1].destination == AgentKind::vision);
  CHECK(subs[2].is_synthesis());
  CHECK(subs[2].depends_on == std::vector<std::string>{subs[0].id, subs[1].id});
  std::size_t n = 0;
  for (const auto& s : subs) n += s.parts.size();
  CHECK(n == t.parts.size());

  const auto visual = decompose(task_with(Category::visual_troubleshooting));
  REQUIRE(visual.size() == 2);
  CHECK(visual[0].destination == AgentKind::vision);
}

TEST_CASE("one task through both arms") {
  const auto& t = task_with(Category::product_defect);
  Rig native(RoutingMode::native(), "native");
  Rig tbn(RoutingMode::text_bottleneck(), "tbn");

  const TaskResult a = native.orch.execute(t);
  const TaskResult b = tbn.orch.execute(t);
  CHECK(a.input_digest == b.input_digest);
  CHECK(a.input_digest.size() == 64);
  CHECK(a.missing_evidence.empty());
  CHECK(a.subtasks.size() == 3);
  CHECK(a.correct == score(a.decision, t));

  const auto fid = [](const TaskResult& r, AgentKind k) {
    for (const auto& e : r.evidence) {
      if (e.source == k) return e.fidelity;
    }
    FAIL("no evidence");
    return Fidelity::native;
  };
  CHECK(fid(a, AgentKind::voice) == predicted_profile(t, RoutingMode::native()).voice);
  CHECK(fid(b, AgentKind::voice) == Fidelity::transcoded);
  CHECK(fid(b, AgentKind::vision) == Fidelity::transcoded);

  CHECK_FALSE(a.routing_decisions.empty());
  for (const auto& d : b.routing_decisions) {
    if (d.part_modality == Modality::voice || d.part_modality == Modality::image) CHECK(d.outcome == RouteOutcome::transcoded);
  }

  const TaskResult back = task_result_from_json(task_result_to_json(a));
  CHECK(back.task_id == a.task_id);
  CHECK(back.decision == a.decision);
  CHECK(back.input_digest == a.input_digest);
  CHECK(back.evidence == a.evidence);
}

TEST_CASE("a stopped analysis agent becomes missing evidence") {
  const auto& t = task_with(Category::product_defect);
  Rig rig(RoutingMode::native(), "missing");
  rig.mesh.agent(AgentKind::vision).stop();
  const TaskResult r = rig.orch.execute(t);
  CHECK(r.missing_evidence.contains(AgentKind::vision));
  for (const auto& e : r.evidence) CHECK(e.source != AgentKind::vision);
  for (const auto& s : r.subtasks) {
    if (s.agent == AgentKind::vision) CHECK_FALSE(s.ok);
  }
}

TEST_CASE("synthesis down is agent_unreachable") {
  const auto& t = task_with(Category::assembly_guidance);
  Rig rig(RoutingMode::native(), "synth-down");
  rig.mesh.agent(AgentKind::text).stop();
  try {
    rig.orch.execute(t);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::agent_unreachable);
  }
}

TEST_CASE("router down is agent_unreachable") {
  const auto& t = task_with(Category::assembly_guidance);
  Rig rig(RoutingMode::native(), "router-down");
  rig.router.stop();
  try {
    rig.orch.execute(t);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::agent_unreachable);
  }
}

TEST_CASE("payloads over the inline limit travel by reference") {
  BenchmarkTask t = task_with(Category::visual_troubleshooting);
  for (auto& [i, bytes] : generate_synthetic_media(t, 2 * kMaxInlineBytes)) {
    auto& f = std::get<FilePart>(t.parts[i].part);
    f.payload = bytes;
  }
  Rig native(RoutingMode::native(), "big-native");
  Rig tbn(RoutingMode::text_bottleneck(), "big-tbn");
  const TaskResult a = native.orch.execute(t);
  const TaskResult b = tbn.orch.execute(t);
  CHECK(a.input_digest == b.input_digest);
  CHECK(a.missing_evidence.empty());
  CHECK(b.missing_evidence.empty());
  bool saw_native_image = false;
  for (const auto& e : a.evidence) saw_native_image |= e.source == AgentKind::vision && e.fidelity == Fidelity::native;
  CHECK(saw_native_image);
  CHECK_FALSE(fs::is_empty(native.router.blobs()->dir()));
}

TEST_CASE("analysis sub-tasks run concurrently") {
  const auto& t = task_with(Category::product_defect);
  MeshConfig mc;
  mc.delays.analysis[{AgentKind::voice, Fidelity::native}] = 150ms;
  mc.delays.analysis[{AgentKind::vision, Fidelity::native}] = 150ms;
  mc.delays.analysis[{AgentKind::voice, Fidelity::transcoded}] = 150ms;
  mc.delays.analysis[{AgentKind::vision, Fidelity::transcoded}] = 150ms;

  Rig par(RoutingMode::native(), "par", mc);
  OrchestratorConfig serial;
  serial.parallel_subtasks = false;
  Rig seq(RoutingMode::native(), "seq", mc, serial);

  const auto p = par.orch.execute(t).e2e_latency;
  const auto s = seq.orch.execute(t).e2e_latency;
  CHECK(s >= 300ms);
  CHECK(p < 290ms);
}

TEST_CASE("input digest tracks content") {
  const std::vector<Part> a{make_text_part("x"), make_file_part("image/png", {1, 2})};
  const std::vector<Part> b{make_text_part("x"), make_file_part("image/png", {1, 3})};
  const std::vector<Part> c{make_text_part("x"), make_file_part("image/jpeg", {1, 2})};
  CHECK(input_digest(a) == input_digest(a));
  CHECK(input_digest(a) != input_digest(b));
  CHECK(input_digest(a) != input_digest(c));
}

TEST_CASE("orchestrator needs all three agent urls") {
  CHECK_THROWS_AS(Orchestrator({{AgentKind::voice, "http://a"}}, "http://r", "x"), Error);
}
