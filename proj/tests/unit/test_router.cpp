#include <doctest.h>

#include <filesystem>
#include <random>

#include "../oracles.hpp"
#include "mma2a/agents.hpp"
#include "mma2a/error.hpp"
#include "mma2a/http.hpp"
#include "mma2a/media.hpp"
#include "mma2a/router.hpp"
#include "mma2a/router_service.hpp"

using namespace mma2a;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mma2a-test-router-" + name);
  fs::remove_all(dir);
  return dir;
}

std::shared_ptr<CardRegistry> reference_registry() {
  return std::make_shared<CardRegistry>([](const std::string& url) {
    if (url == "http://voice") return reference_card(AgentKind::voice, url);
    if (url == "http://vision") return reference_card(AgentKind::vision, url);
    return reference_card(AgentKind::text, url);
  });
}

bool has_marker(const Part& p) { return is_text(p) && text_of(p).find(kTranscodedMarker) != std::string::npos; }

}  // namespace

TEST_CASE("routing case split") {
  const auto native = RoutingMode::native(), tbn = RoutingMode::text_bottleneck(), adaptive = RoutingMode::adaptive(2);
  const TaskPriority lo{1}, hi{3};
  for (auto m : {Modality::voice, Modality::image}) {
    CHECK(decide_route(m, true, native, lo) == RouteOutcome::native);
    CHECK(decide_route(m, false, native, lo) == RouteOutcome::transcoded);
    CHECK(decide_route(m, true, tbn, hi) == RouteOutcome::transcoded);
    CHECK(decide_route(m, true, adaptive, hi) == RouteOutcome::native);
    CHECK(decide_route(m, true, adaptive, TaskPriority{2}) == RouteOutcome::native);
    CHECK(decide_route(m, true, adaptive, lo) == RouteOutcome::transcoded);
    CHECK(decide_route(m, false, adaptive, hi) == RouteOutcome::transcoded);
  }
  // Text follows the capability check even in text_bottleneck mode.
  CHECK(decide_route(Modality::text, true, tbn, lo) == RouteOutcome::native);
  CHECK(decide_route(Modality::text, false, native, lo) == RouteOutcome::transcoded);
  for (const auto& mode : {native, tbn, adaptive}) {
    CHECK(decide_route(Modality::data, false, mode, lo) == RouteOutcome::native);
  }
  // theta = infinity turns adaptive into text_bottleneck for media.
  CHECK(decide_route(Modality::image, true, RoutingMode::adaptive(kThetaInfinity), TaskPriority{1000}) ==
        RouteOutcome::transcoded);
}

TEST_CASE("mode names parse back") {
  for (const char* n : {"native", "text_bottleneck", "adaptive"}) {
    const auto m = parse_routing_mode(n, 3);
    REQUIRE(m);
    CHECK(m->name() == n);
  }
  CHECK(parse_routing_mode("adaptive", 3)->theta == 3);
  CHECK_FALSE(parse_routing_mode("bottleneck").has_value());
}

TEST_CASE("decide_route agrees with the oracle on every combination") {
  const std::vector<std::vector<std::string>> yes = {{"*/*"}};
  const std::vector<std::vector<std::string>> no = {{"x/none"}};
  const std::pair<Modality, oracle::Kind> kinds[] = {{Modality::voice, oracle::Kind::voice},
                                                     {Modality::image, oracle::Kind::image},
                                                     {Modality::text, oracle::Kind::text},
                                                     {Modality::data, oracle::Kind::data}};
  for (const auto& [m, k] : kinds) {
    for (bool capable : {false, true}) {
      for (int mk = 0; mk < 3; ++mk) {
        for (int theta = 0; theta < 4; ++theta) {
          for (int prio = 0; prio < 4; ++prio) {
            const RoutingMode mode = mk == 0 ? RoutingMode::native() : mk == 1 ? RoutingMode::text_bottleneck()
                                                                                 : RoutingMode::adaptive(theta);
            const auto om = oracle::Mode(mk);
            const bool want = oracle::route_native(k, "a/b", capable ? yes : no, om, theta, prio);
            CHECK((decide_route(m, capable, mode, TaskPriority{prio}) == RouteOutcome::native) == want);
          }
        }
      }
    }
  }
}

TEST_CASE("router transcodes and logs one decision per part") {
  auto telemetry = std::make_shared<RoutingTelemetry>();
  ModalityRouter router(reference_registry(), RoutingMode::native(), telemetry);

  const Part wav = make_file_part("audio/wav", media::make_wav("my blender leaks"));
  const Part png = make_file_part("image/png", media::make_png("jar photo", 1));

  auto r1 = router.route(wav, "http://voice", {}, "t1");
  CHECK(r1.decision.outcome == RouteOutcome::native);
  CHECK(r1.part == wav);

  auto r2 = router.route(wav, "http://vision", {}, "t1");
  CHECK(r2.decision.outcome == RouteOutcome::transcoded);
  CHECK(r2.decision.transcoder_used == TranscoderKind::speech_to_text);
  REQUIRE(has_marker(r2.part));
  CHECK(text_of(r2.part).find("my blender leaks") != std::string::npos);

  auto r3 = router.route(png, "http://text", {}, "t2");
  CHECK(r3.decision.transcoder_used == TranscoderKind::image_caption);
  CHECK(text_of(r3.part).find("jar photo") != std::string::npos);

  CHECK(telemetry->size() == 3);
  CHECK(telemetry->for_task("t1").size() == 2);
  const auto profile = routing_profile(telemetry->snapshot());
  CHECK(profile.at(Modality::voice) == OutcomeCounts{1, 1});
  CHECK(profile.at(Modality::image) == OutcomeCounts{0, 1});
  CHECK(profile.totals().total() == 3);
}

TEST_CASE("text bottleneck transcodes every media part") {
  auto telemetry = std::make_shared<RoutingTelemetry>();
  ModalityRouter router(reference_registry(), RoutingMode::text_bottleneck(), telemetry);
  const Part wav = make_file_part("audio/wav", media::make_wav("hello"));
  const auto r = router.route(wav, "http://voice", {}, "t");
  CHECK(r.decision.outcome == RouteOutcome::transcoded);
  CHECK(has_marker(r.part));
  CHECK(router.route(make_text_part("hi"), "http://voice", {}, "t").decision.outcome == RouteOutcome::transcoded);
  CHECK(router.route(make_text_part("hi"), "http://text", {}, "t").decision.outcome == RouteOutcome::native);
}

TEST_CASE("router failures") {
  auto telemetry = std::make_shared<RoutingTelemetry>();
  auto broken = std::make_shared<CardRegistry>(
      [](const std::string& url) -> AgentCard { throw Error(ErrorCode::network_unreachable, url); });
  ModalityRouter no_cards(broken, RoutingMode::native(), telemetry);
  try {
    no_cards.route(make_text_part("x"), "http://gone", {}, "t");
    FAIL("expected card_unavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::card_unavailable);
  }

  ModalityRouter router(reference_registry(), RoutingMode::text_bottleneck(), telemetry);
  try {
    router.route(make_file_part("audio/wav", Bytes{1, 2, 3}), "http://voice", {}, "t");
    FAIL("expected transcoder_failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::transcoder_failure);
  }
  CHECK(telemetry->size() == 0);
}

TEST_CASE("blob store and wire encoding") {
  BlobStore blobs(temp_dir("blobs"), "http://127.0.0.1:1");
  const Bytes big = media::make_png("big picture", 3, kMaxInlineBytes + 10);
  const std::string uri = blobs.put(big);
  CHECK(uri == "http://127.0.0.1:1/blobs/" + sha256_hex(big));
  CHECK(blobs.put(big) == uri);
  CHECK(blobs.resolve(uri) == big);
  CHECK_FALSE(blobs.get("nothex").has_value());

  const Part inline_part = make_file_part("image/png", Bytes(kMaxInlineBytes, 0));
  CHECK(encode_for_wire(inline_part, blobs) == inline_part);
  const Part moved = encode_for_wire(make_file_part("image/png", big, "p.png"), blobs);
  CHECK(std::get<FilePart>(moved).uri() == uri);
  CHECK(std::get<FilePart>(moved).name == "p.png");
  CHECK(encode_for_wire(make_text_part("t"), blobs) == make_text_part("t"));

  // A URI part can still be transcoded when the router can resolve it.
  auto shared = std::make_shared<BlobStore>(blobs.dir(), "http://127.0.0.1:1");
  ModalityRouter router(reference_registry(), RoutingMode::text_bottleneck(), std::make_shared<RoutingTelemetry>(),
                        shared);
  const auto r = router.route(moved, "http://vision", {}, "t");
  CHECK(text_of(r.part).find("big picture") != std::string::npos);
}

TEST_CASE("sha256 known answer") {
  const std::string abc = "abc";
  CHECK(sha256_hex(Bytes(abc.begin(), abc.end())) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("telemetry jsonl round-trip") {
  RoutingTelemetry t;
  t.append({"a", Modality::voice, "http://v", RouteOutcome::transcoded, TranscoderKind::speech_to_text, 12, {}});
  t.append({"b", Modality::data, "http://t", RouteOutcome::native, std::nullopt, 13, std::chrono::nanoseconds(5)});
  const auto path = temp_dir("telemetry") / "t.jsonl";
  fs::create_directories(path.parent_path());
  t.write_jsonl(path);
  const auto back = RoutingTelemetry::read_jsonl(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].transcoder_used == TranscoderKind::speech_to_text);
  CHECK(back[1].decision_latency.count() == 5);
  CHECK(back[1].outcome == RouteOutcome::native);
}

TEST_CASE("router service forwards and serves blobs") {
  // Echo agent: returns the message it received as an artifact.
  HttpServer agent;
  std::string seen;
  agent.post("/", [&](const HttpRequest& req) {
    seen = req.body;
    const auto rpc = parse_rpc_request(req.body);
    return HttpResponse{200, rpc_result(rpc.id, Json{{"ok", true}})};
  });
  agent.start("127.0.0.1", 0);

  auto registry = std::make_shared<CardRegistry>(
      [&](const std::string& url) { return reference_card(AgentKind::vision, url); });
  auto telemetry = std::make_shared<RoutingTelemetry>();
  auto blobs = std::make_shared<BlobStore>(temp_dir("svc"), "");
  auto router = std::make_shared<ModalityRouter>(registry, RoutingMode::native(), telemetry, blobs);
  RouterService svc(router, blobs);
  svc.start();

  const Bytes big = media::make_png("huge", 9, kMaxInlineBytes + 1);
  Message m{Role::user,
            {encode_for_wire(make_file_part("image/png", big), *blobs), make_file_part("audio/wav", media::make_wav("hi"))},
            "m1",
            Json{{"benchmarkTaskId", "task-9"}, {"priority", 2}}};
  RpcRequest req{"tasks/send", Json{{"id", "x"}, {"message", message_to_json(m)}}, Json(1)};
  HttpClientOptions opts;
  opts.headers[std::string(kDestinationHeader)] = agent.base_url();
  const auto res = http_post(svc.base_url() + "/", encode_rpc_request(req), "application/json", opts);
  const auto reply = parse_rpc_response(res.body);
  REQUIRE(reply.result);

  const auto forwarded = parse_rpc_request(seen);
  const Message got = message_from_json(forwarded.params["message"]);
  REQUIRE(got.parts.size() == 2);
  const auto& image = std::get<FilePart>(got.parts[0]);
  CHECK_FALSE(image.is_inline());
  CHECK(http_get(image.uri()).body == std::string(big.begin(), big.end()));
  CHECK(has_marker(got.parts[1]));  // vision agent cannot take audio

  const auto decisions = telemetry->for_task("task-9");
  REQUIRE(decisions.size() == 2);
  CHECK(decisions[0].outcome == RouteOutcome::native);
  CHECK(decisions[1].outcome == RouteOutcome::transcoded);

  // Missing destination header.
  const auto bad = parse_rpc_response(http_post(svc.base_url() + "/", encode_rpc_request(req), "application/json").body);
  CHECK(bad.error_code == rpc_code::invalid_request);
  svc.stop();
  agent.stop();
}
