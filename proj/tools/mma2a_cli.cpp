// mma2a: launch the agent mesh, run paired experiments and the ablation,
// validate manifests and recompute reports from a run directory.
//
// Exit codes: 0 success, 2 config or manifest error, 3 runtime error.

#include <csignal>
#include <pthread.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mma2a/benchmark.hpp"
#include "mma2a/error.hpp"
#include "mma2a/experiment.hpp"
#include "mma2a/http.hpp"
#include "mma2a/orchestrator.hpp"
#include "mma2a/report.hpp"

namespace fs = std::filesystem;
using mma2a::Error;
using mma2a::ErrorCode;
using Json = nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunConfig {
  std::string manifest = "data/crossmodal_cs/manifest.json";
  std::vector<std::string> modes;  // serve: one; experiment: baseline then treatment
  std::string backend = "scripted";
  std::optional<std::uint64_t> seed;
  int theta = 0;
  std::string out = "runs";
  std::string delay_profile = "none";
  std::string host = "127.0.0.1";
  int voice_port = 0, vision_port = 0, text_port = 0, router_port = 0, orchestrator_port = 0;
  std::size_t resamples = 10'000;
  std::string keyword_rules;
};

Json config_to_json(const RunConfig& c) {
  Json j{{"manifest", c.manifest},     {"mode", c.modes},
         {"backend", c.backend},       {"theta", c.theta},
         {"out", c.out},               {"delay_profile", c.delay_profile},
         {"host", c.host},             {"resamples", c.resamples},
         {"ports",
          {{"voice", c.voice_port},
           {"vision", c.vision_port},
           {"text", c.text_port},
           {"router", c.router_port},
           {"orchestrator", c.orchestrator_port}}}};
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  if (!c.keyword_rules.empty()) j["keyword_rules"] = c.keyword_rules;
  return j;
}

// Values from the config file fill every option not given on the command line.
void apply_config_file(const std::string& path, RunConfig& c, const CLI::App& app) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot read config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::config_error, path + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::config_error, path + ": top level must be an object");
  auto unset = [&](const char* flag) {
    const auto* opt = app.get_option_no_throw(flag);
    return !opt || opt->count() == 0;
  };
  try {
    if (j.contains("manifest") && unset("--manifest")) c.manifest = j["manifest"].get<std::string>();
    if (j.contains("mode") && unset("--mode")) {
      c.modes = j["mode"].is_array() ? j["mode"].get<std::vector<std::string>>()
                                     : std::vector<std::string>{j["mode"].get<std::string>()};
    }
    if (j.contains("backend") && unset("--backend")) c.backend = j["backend"].get<std::string>();
    if (j.contains("seed") && !j["seed"].is_null() && unset("--seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("theta") && unset("--theta")) c.theta = j["theta"].get<int>();
    if (j.contains("out") && unset("--out")) c.out = j["out"].get<std::string>();
    if (j.contains("delay_profile") && unset("--delay-profile")) c.delay_profile = j["delay_profile"].get<std::string>();
    if (j.contains("host") && unset("--host")) c.host = j["host"].get<std::string>();
    if (j.contains("resamples") && unset("--resamples")) c.resamples = j["resamples"].get<std::size_t>();
    if (j.contains("keyword_rules") && unset("--keyword-rules")) c.keyword_rules = j["keyword_rules"].get<std::string>();
    if (j.contains("ports")) {
      const Json& p = j["ports"];
      auto port = [&](const char* key, const char* flag, int& dst) {
        if (p.contains(key) && unset(flag)) dst = p[key].get<int>();
      };
      port("voice", "--voice-port", c.voice_port);
      port("vision", "--vision-port", c.vision_port);
      port("text", "--text-port", c.text_port);
      port("router", "--router-port", c.router_port);
      port("orchestrator", "--orchestrator-port", c.orchestrator_port);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::config_error, path + ": " + e.what());
  }
}

mma2a::RoutingMode parse_mode(const std::string& name, int theta) {
  auto m = mma2a::parse_routing_mode(name, theta);
  if (!m) throw Error(ErrorCode::config_error, "unknown mode '" + name + "' (native, text_bottleneck, adaptive)");
  return *m;
}

mma2a::BackendKind parse_backend(const std::string& name) {
  auto b = mma2a::parse_backend_kind(name);
  if (!b) throw Error(ErrorCode::config_error, "unknown backend '" + name + "' (keyword, scripted, llm)");
  return *b;
}

mma2a::MeshConfig mesh_config(const RunConfig& c) {
  mma2a::MeshConfig m;
  m.host = c.host;
  m.agent_ports = {{mma2a::AgentKind::voice, c.voice_port},
                   {mma2a::AgentKind::vision, c.vision_port},
                   {mma2a::AgentKind::text, c.text_port}};
  m.backend = parse_backend(c.backend);
  auto delays = mma2a::DelayProfile::named(c.delay_profile);
  if (!delays) throw Error(ErrorCode::config_error, "unknown delay profile '" + c.delay_profile + "' (none, calibrated)");
  m.delays = *delays;
  if (!c.keyword_rules.empty()) m.keyword_rules = c.keyword_rules;
  return m;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return os.str();
}

fs::path make_run_dir(const std::string& out, const std::string& label) {
  const fs::path base = fs::path(out) / (timestamp() + "-" + label);
  fs::path dir = base;
  for (int i = 2; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::config_error, "cannot write " + path.string());
  out << text;
}

// One JSON object per line; flushed after every event so a failed run leaves
// a usable partial log.
class EventLog {
 public:
  explicit EventLog(const fs::path& path) : path_(path), out_(path, std::ios::app) {}
  void write(const std::string& event, Json fields = Json::object()) {
    std::lock_guard lock(mutex_);
    fields["event"] = event;
    fields["at"] = timestamp();
    out_ << fields.dump() << '\n';
    out_.flush();
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::mutex mutex_;
  std::ofstream out_;
};

void write_results(const fs::path& path, std::span<const mma2a::TaskResult> results) {
  std::ofstream out(path);
  for (const auto& r : results) out << mma2a::task_result_to_json(r).dump() << '\n';
}

std::vector<mma2a::TaskResult> read_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot read " + path.string());
  std::vector<mma2a::TaskResult> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(mma2a::task_result_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
    }
  }
  return out;
}

Json labels_to_json(const std::map<std::string, mma2a::ErrorLabel>& labels) {
  Json j = Json::object();
  for (const auto& [id, l] : labels) j[id] = {{"failure_mode", l.failure_mode}, {"layer", l.layer}};
  return j;
}

std::map<std::string, mma2a::ErrorLabel> labels_from_json(const Json& j) {
  std::map<std::string, mma2a::ErrorLabel> out;
  for (const auto& [id, l] : j.items()) {
    out[id] = mma2a::ErrorLabel{l.at("failure_mode").get<std::string>(), l.at("layer").get<std::string>()};
  }
  return out;
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw Error(ErrorCode::config_error, "--seed is required (it drives the bootstrap CI)");
  return *c.seed;
}

std::pair<mma2a::RoutingMode, mma2a::RoutingMode> paired_modes(RunConfig& c) {
  if (c.modes.empty()) c.modes = {"text_bottleneck", "native"};
  const auto& modes = c.modes;
  if (modes.size() != 2) throw Error(ErrorCode::config_error, "paired runs need exactly two modes (baseline, treatment)");
  return {parse_mode(modes[0], c.theta), parse_mode(modes[1], c.theta)};
}

mma2a::ExperimentConfig experiment_config(RunConfig& c) {
  mma2a::ExperimentConfig e;
  e.mesh = mesh_config(c);
  std::tie(e.baseline, e.treatment) = paired_modes(c);
  return e;
}

void print_summary(const mma2a::ReportBundle& r, const fs::path& dir) {
  std::cout << std::fixed << std::setprecision(1) << "TCA " << r.baseline.arm << " (" << r.baseline.mode
            << ") " << r.baseline.tca_pct << "%  " << r.treatment.arm << " (" << r.treatment.mode << ") "
            << r.treatment.tca_pct << "%  delta " << std::showpos << r.delta_tca_pp << std::noshowpos << " pp\n"
            << std::setprecision(3) << "McNemar p = " << r.mcnemar.p << "  95% CI [" << std::setprecision(1)
            << r.bootstrap.lo_pp << ", " << r.bootstrap.hi_pp << "] pp\n"
            << "run directory: " << dir.string() << '\n';
}

mma2a::ReportBundle write_report(const fs::path& dir, mma2a::ReportInputs inputs) {
  auto report = mma2a::build_report(inputs);
  write_text(dir / "report.json", mma2a::report_to_json(report).dump(2) + "\n");
  write_text(dir / "report.md", mma2a::render_markdown(report));
  return report;
}

mma2a::Benchmark load(const RunConfig& c) { return mma2a::load_manifest(c.manifest); }

int cmd_experiment(RunConfig& c) {
  const auto seed = require_seed(c);
  const auto bench = load(c);
  auto cfg = experiment_config(c);
  const fs::path dir = make_run_dir(c.out, "experiment-" + c.backend);
  cfg.work_dir = dir / "blobs";
  write_text(dir / "config.json", config_to_json(c).dump(2) + "\n");
  EventLog log(dir / "run.log.jsonl");
  log.write("start", {{"command", "experiment"}, {"tasks", bench.tasks.size()}});
  cfg.on_result = [&](const mma2a::TaskResult& r) {
    log.write("task", {{"task_id", r.task_id},
                       {"arm", r.arm},
                       {"action", std::string(mma2a::to_string(r.decision.action))},
                       {"correct", r.correct},
                       {"e2e_latency_ms", double(r.e2e_latency.count()) / 1e6}});
  };
  try {
    const auto run = mma2a::run_paired_experiment(bench, cfg);
    write_results(dir / "results_baseline.jsonl", run.baseline.results);
    write_results(dir / "results_treatment.jsonl", run.treatment.results);
    mma2a::RoutingTelemetry bt, tt;
    for (const auto& d : run.baseline.telemetry) bt.append(d);
    for (const auto& d : run.treatment.telemetry) tt.append(d);
    bt.write_jsonl(dir / "telemetry_baseline.jsonl");
    tt.write_jsonl(dir / "telemetry_treatment.jsonl");
    const auto labels = mma2a::error_labels_of(bench);
    write_text(dir / "error_labels.json", labels_to_json(labels).dump(2) + "\n");

    mma2a::ReportInputs in;
    in.backend = c.backend;
    in.baseline_mode = std::string(cfg.baseline.name());
    in.treatment_mode = std::string(cfg.treatment.name());
    in.baseline = run.baseline.results;
    in.treatment = run.treatment.results;
    in.baseline_telemetry = run.baseline.telemetry;
    in.treatment_telemetry = run.treatment.telemetry;
    in.error_labels = labels;
    in.seed = seed;
    in.resamples = c.resamples;
    const auto report = write_report(dir, std::move(in));
    fs::remove_all(dir / "blobs");
    log.write("end", {{"status", "ok"}});
    print_summary(report, dir);
  } catch (const std::exception& e) {
    log.write("end", {{"status", "error"}, {"message", e.what()}});
    std::cerr << "partial log: " << log.path().string() << '\n';
    throw;
  }
  return 0;
}

int cmd_ablation(RunConfig& c) {
  const auto bench = load(c);
  auto cfg = experiment_config(c);
  const fs::path dir = make_run_dir(c.out, "ablation");
  cfg.work_dir = dir / "blobs";
  write_text(dir / "config.json", config_to_json(c).dump(2) + "\n");
  EventLog log(dir / "run.log.jsonl");
  log.write("start", {{"command", "ablation"}, {"tasks", bench.tasks.size()}});
  cfg.on_result = [&](const mma2a::TaskResult& r) {
    log.write("task", {{"task_id", r.task_id}, {"arm", r.arm}, {"correct", r.correct}});
  };
  try {
    const auto rows = mma2a::run_ablation(bench, cfg);
    for (const auto& row : rows) {
      const std::string b(mma2a::to_string(row.backend));
      write_results(dir / ("results_" + b + "_baseline.jsonl"), row.run.baseline.results);
      write_results(dir / ("results_" + b + "_treatment.jsonl"), row.run.treatment.results);
    }
    std::optional<mma2a::KeywordRuleTable> rules;
    if (bench.keyword_rules) rules = mma2a::KeywordRuleTable::load(bench.keyword_rules->string());
    if (!c.keyword_rules.empty()) rules = mma2a::KeywordRuleTable::load(c.keyword_rules);
    const auto report = mma2a::build_ablation_report(rows, rules);
    write_text(dir / "ablation.json", mma2a::ablation_to_json(report).dump(2) + "\n");
    const auto md = mma2a::render_ablation_markdown(report);
    write_text(dir / "ablation.md", md);
    fs::remove_all(dir / "blobs");
    log.write("end", {{"status", "ok"}});
    std::cout << md << "run directory: " << dir.string() << '\n';
  } catch (const std::exception& e) {
    log.write("end", {{"status", "error"}, {"message", e.what()}});
    std::cerr << "partial log: " << log.path().string() << '\n';
    throw;
  }
  return 0;
}

int cmd_report(const RunConfig& c, const std::string& run_dir) {
  const fs::path dir(run_dir);
  Json saved;
  {
    std::ifstream in(dir / "config.json");
    if (!in) throw Error(ErrorCode::config_error, "no config.json in " + run_dir);
    saved = Json::parse(in, nullptr, false);
    if (saved.is_discarded()) throw Error(ErrorCode::config_error, (dir / "config.json").string() + " is not JSON");
  }
  std::uint64_t seed = 0;
  if (c.seed) {
    seed = *c.seed;
  } else if (saved.contains("seed") && saved["seed"].is_number_unsigned()) {
    seed = saved["seed"].get<std::uint64_t>();
  } else {
    throw Error(ErrorCode::config_error, "--seed is required (the run directory records none)");
  }
  std::vector<std::string> modes = saved.value("mode", std::vector<std::string>{});
  if (modes.empty()) modes = {"text_bottleneck", "native"};
  if (modes.size() != 2) throw Error(ErrorCode::config_error, "run directory does not describe a paired run");

  const auto base = read_results(dir / "results_baseline.jsonl");
  const auto treat = read_results(dir / "results_treatment.jsonl");
  const auto bt = mma2a::RoutingTelemetry::read_jsonl(dir / "telemetry_baseline.jsonl");
  const auto tt = mma2a::RoutingTelemetry::read_jsonl(dir / "telemetry_treatment.jsonl");
  std::map<std::string, mma2a::ErrorLabel> labels;
  if (std::ifstream in(dir / "error_labels.json"); in) labels = labels_from_json(Json::parse(in));

  mma2a::ReportInputs in;
  in.backend = saved.value("backend", std::string("scripted"));
  in.baseline_mode = modes[0];
  in.treatment_mode = modes[1];
  in.baseline = base;
  in.treatment = treat;
  in.baseline_telemetry = bt;
  in.treatment_telemetry = tt;
  in.error_labels = std::move(labels);
  in.seed = seed;
  in.resamples = c.resamples;
  print_summary(write_report(dir, std::move(in)), dir);
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto bench = mma2a::load_manifest(path);
  std::size_t parts = 0;
  for (const auto& t : bench.tasks) parts += t.parts.size();
  std::cout << path << ": ok (" << bench.tasks.size() << " tasks, " << parts << " parts, "
            << bench.kb.products.size() << " products)\n";
  return 0;
}

int cmd_generate_media(const RunConfig& c) {
  mma2a::LoadOptions opts;
  opts.load_media = false;
  opts.require_media = false;
  const auto bench = mma2a::load_manifest(c.manifest, opts);
  std::size_t written = 0;
  for (const auto& task : bench.tasks) {
    for (const auto& [i, bytes] : mma2a::generate_synthetic_media(task)) {
      const fs::path file = bench.root / *task.parts[i].media;
      fs::create_directories(file.parent_path());
      std::ofstream out(file, std::ios::binary);
      out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
      if (!out) throw Error(ErrorCode::config_error, "cannot write " + file.string());
      ++written;
    }
  }
  std::cout << "wrote " << written << " media files under " << (bench.root / "media").string() << '\n';
  return 0;
}

int cmd_serve(const RunConfig& c) {
  if (c.modes.size() > 1) throw Error(ErrorCode::config_error, "serve takes a single --mode");
  const auto mode = parse_mode(c.modes.empty() ? "native" : c.modes.front(), c.theta);
  const auto bench = load(c);
  const auto mesh_cfg = mesh_config(c);

  // Signals are taken synchronously on this thread; block them before any
  // server thread starts so none of those threads receives them.
  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  mma2a::AgentMesh mesh(mma2a::make_backend(mesh_cfg.backend, bench, mesh_cfg), mesh_cfg);
  const fs::path blob_dir = fs::temp_directory_path() / ("mma2a-serve-" + timestamp());
  mma2a::RouterNode router(mode, blob_dir, {}, c.host, c.router_port);
  const mma2a::Orchestrator orchestrator(mesh.urls(), router.url(), std::string(mode.name()), &bench.kb,
                                         router.telemetry(), router.blobs());

  mma2a::HttpServer front;
  front.post("/tasks/([^/]+)/run", [&](const mma2a::HttpRequest& req) {
    const auto* task = bench.find(req.path_match);
    if (!task) return mma2a::HttpResponse{404, Json{{"error", "unknown task " + req.path_match}}.dump()};
    try {
      return mma2a::HttpResponse{200, mma2a::task_result_to_json(orchestrator.execute(*task)).dump()};
    } catch (const Error& e) {
      return mma2a::HttpResponse{502, Json{{"error", e.what()}}.dump()};
    }
  });
  front.get("/tasks", [&](const mma2a::HttpRequest&) {
    Json ids = Json::array();
    for (const auto& t : bench.tasks) ids.push_back(t.task_id);
    return mma2a::HttpResponse{200, ids.dump()};
  });
  front.get("/telemetry", [&](const mma2a::HttpRequest&) {
    Json out = Json::array();
    for (const auto& d : router.telemetry()->snapshot()) out.push_back(mma2a::decision_to_json(d));
    return mma2a::HttpResponse{200, out.dump()};
  });
  front.start(c.host, c.orchestrator_port);

  for (const auto& [kind, url] : mesh.urls()) {
    std::cout << std::left << std::setw(8) << mma2a::to_string(kind) << url << "/.well-known/agent-card.json\n";
  }
  std::cout << "router  " << router.url() << " (mode " << mode.name() << ")\n"
            << "orchestrator " << "http://" << c.host << ":" << front.port() << " (POST /tasks/<id>/run)\n"
            << std::flush;

  int sig = 0;
  sigwait(&sigs, &sig);
  std::cout << "shutting down\n";
  // Front end first so that in-flight tasks finish against a live mesh.
  front.stop();
  router.stop();
  mesh.stop();
  std::error_code ec;
  fs::remove_all(blob_dir, ec);
  return 0;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_error:
    case ErrorCode::manifest_parse_error:
    case ErrorCode::invariant_violation:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modality-aware routing experiments over A2A agents"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_file;
  std::string positional_path;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "JSON config file; command-line flags take precedence");
    sub->add_option("--manifest", cfg.manifest, "benchmark manifest")->capture_default_str();
  };
  auto run_flags = [&](CLI::App* sub) {
    sub->add_option("--mode", cfg.modes, "routing mode(s): native, text_bottleneck, adaptive")->delimiter(',');
    sub->add_option("--backend", cfg.backend, "decision backend: keyword, scripted, llm")->capture_default_str();
    sub->add_option("--theta", cfg.theta, "priority threshold for adaptive mode")->capture_default_str();
    sub->add_option("--delay-profile", cfg.delay_profile, "simulated agent delays: none, calibrated")
        ->capture_default_str();
    sub->add_option("--host", cfg.host)->capture_default_str();
    sub->add_option("--keyword-rules", cfg.keyword_rules, "rule table overriding the manifest's");
  };
  auto out_flag = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "parent directory for run directories")->capture_default_str();
  };

  auto* serve = app.add_subcommand("serve", "start the agents, router and orchestrator endpoint");
  common(serve);
  run_flags(serve);
  serve->add_option("--voice-port", cfg.voice_port);
  serve->add_option("--vision-port", cfg.vision_port);
  serve->add_option("--text-port", cfg.text_port);
  serve->add_option("--router-port", cfg.router_port);
  serve->add_option("--orchestrator-port", cfg.orchestrator_port);

  auto* experiment = app.add_subcommand("experiment", "run both arms over every task and write a report");
  common(experiment);
  run_flags(experiment);
  out_flag(experiment);
  experiment->add_option("--seed", cfg.seed, "bootstrap seed (required)");
  experiment->add_option("--resamples", cfg.resamples)->capture_default_str();

  auto* ablation = app.add_subcommand("ablation", "keyword vs scripted decision step, both arms");
  common(ablation);
  run_flags(ablation);
  out_flag(ablation);

  auto* validate = app.add_subcommand("validate-manifest", "check a manifest and its media");
  validate->add_option("path", positional_path, "manifest path")->required();

  auto* report = app.add_subcommand("report", "recompute report files from a run directory");
  report->add_option("run_dir", positional_path, "directory written by `experiment`")->required();
  report->add_option("--seed", cfg.seed, "bootstrap seed (defaults to the one recorded)");
  report->add_option("--resamples", cfg.resamples)->capture_default_str();

  auto* gen = app.add_subcommand("generate-media", "write the placeholder WAV/PNG files named by a manifest");
  common(gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    auto* sub = app.get_subcommands().front();
    if (!config_file.empty()) apply_config_file(config_file, cfg, *sub);
    if (sub == serve) return cmd_serve(cfg);
    if (sub == experiment) return cmd_experiment(cfg);
    if (sub == ablation) return cmd_ablation(cfg);
    if (sub == validate) return cmd_validate(positional_path);
    if (sub == report) return cmd_report(cfg, positional_path);
    if (sub == gen) return cmd_generate_media(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
