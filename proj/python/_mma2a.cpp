#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <unistd.h>

#include "mma2a/a2a.hpp"
#include "mma2a/benchmark.hpp"
#include "mma2a/error.hpp"
#include "mma2a/experiment.hpp"
#include "mma2a/report.hpp"
#include "mma2a/router.hpp"
#include "mma2a/stats.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using mma2a::Error;
using mma2a::ErrorCode;

namespace {

// JSON crosses the boundary as text; the Python side parses it with json.loads.
py::object to_py(const mma2a::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

mma2a::Modality parse_modality(const std::string& s) {
  for (auto m : {mma2a::Modality::text, mma2a::Modality::voice, mma2a::Modality::image, mma2a::Modality::data}) {
    if (mma2a::to_string(m) == s) return m;
  }
  throw Error(ErrorCode::config_error, "unknown modality '" + s + "'");
}

mma2a::RoutingMode parse_mode(const std::string& name, int theta) {
  auto mode = mma2a::parse_routing_mode(name, theta);
  if (!mode) throw Error(ErrorCode::config_error, "unknown routing mode '" + name + "'");
  return *mode;
}

std::vector<mma2a::PairedOutcome> outcomes_of(const std::vector<bool>& baseline, const std::vector<bool>& treatment) {
  if (baseline.size() != treatment.size()) throw Error(ErrorCode::arm_mismatch, "arms differ in length");
  std::vector<mma2a::PairedOutcome> out(baseline.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].task_id = std::to_string(i);
    out[i].baseline_correct = baseline[i];
    out[i].treatment_correct = treatment[i];
  }
  return out;
}

py::dict task_summary(const mma2a::BenchmarkTask& t) {
  py::list parts;
  for (const auto& tp : t.parts) {
    py::dict p;
    p["modality"] = std::string(mma2a::to_string(mma2a::part_modality(tp.part)));
    p["mime"] = mma2a::representative_mime(tp.part);
    p["destination"] = std::string(mma2a::to_string(tp.destination()));
    parts.append(p);
  }
  py::dict d;
  d["task_id"] = t.task_id;
  d["category"] = std::string(mma2a::to_string(t.category));
  d["priority"] = t.priority.level;
  d["ground_truth"] = std::string(mma2a::to_string(t.ground_truth));
  d["product_id"] = t.product_id;
  d["parts"] = parts;
  return d;
}

py::object run_experiment(const fs::path& manifest, std::uint64_t seed, const std::string& backend,
                          std::size_t resamples, const std::string& delay_profile, const std::string& baseline,
                          const std::string& treatment, int theta) {
  mma2a::ReportBundle report;
  {
    py::gil_scoped_release unlocked;
    const auto bench = mma2a::load_manifest(manifest);
    mma2a::ExperimentConfig cfg;
    auto kind = mma2a::parse_backend_kind(backend);
    if (!kind) throw Error(ErrorCode::config_error, "unknown backend '" + backend + "'");
    cfg.mesh.backend = *kind;
    auto delays = mma2a::DelayProfile::named(delay_profile);
    if (!delays) throw Error(ErrorCode::config_error, "unknown delay profile '" + delay_profile + "'");
    cfg.mesh.delays = *delays;
    cfg.mesh.llm = mma2a::LlmConfig::from_env();
    cfg.baseline = parse_mode(baseline, theta);
    cfg.treatment = parse_mode(treatment, theta);
    cfg.work_dir = fs::temp_directory_path() / ("mma2a-py-" + std::to_string(getpid()));
    const auto run = mma2a::run_paired_experiment(bench, cfg);
    fs::remove_all(cfg.work_dir);

    mma2a::ReportInputs in;
    in.backend = backend;
    in.baseline_mode = std::string(cfg.baseline.name());
    in.treatment_mode = std::string(cfg.treatment.name());
    in.baseline = run.baseline.results;
    in.treatment = run.treatment.results;
    in.baseline_telemetry = run.baseline.telemetry;
    in.treatment_telemetry = run.treatment.telemetry;
    in.error_labels = mma2a::error_labels_of(bench);
    in.seed = seed;
    in.resamples = resamples;
    report = mma2a::build_report(in);
  }
  return to_py(mma2a::report_to_json(report));
}

}  // namespace

PYBIND11_MODULE(_mma2a, m) {
  m.doc() = "Modality-aware routing for A2A agents: routing rule, statistics and the paired experiment.";

  // Error carries the stable code as a string attribute, e.g. "arm-mismatch".
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] { return py::object(py::exception<Error>(m, "Error")); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& cls = error_type.get_stored();
      py::object inst = cls(py::str(e.what()));
      inst.attr("code") = std::string(mma2a::to_string(e.code()));
      PyErr_SetObject(cls.ptr(), inst.ptr());
    }
  });

  m.attr("MAX_INLINE_BYTES") = mma2a::kMaxInlineBytes;

  m.def(
      "decide_route",
      [](const std::string& modality, bool capable, const std::string& mode, int theta, int priority) {
        const auto out = mma2a::decide_route(parse_modality(modality), capable, parse_mode(mode, theta),
                                             mma2a::TaskPriority{priority});
        return std::string(mma2a::to_string(out));
      },
      py::arg("modality"), py::arg("capable"), py::arg("mode"), py::arg("theta") = 0, py::arg("priority") = 0,
      "\"native\" or \"transcoded\" for one part.");

  m.def(
      "normalize_message",
      [](const std::string& wire) { return mma2a::encode_message(mma2a::decode_message(wire)); }, py::arg("wire"),
      "Decode and re-encode an A2A message; raises Error on invalid input.");

  py::class_<mma2a::McNemarResult>(m, "McNemarResult")
      .def_readonly("p", &mma2a::McNemarResult::p)
      .def_readonly("p_num", &mma2a::McNemarResult::p_num)
      .def_readonly("p_den", &mma2a::McNemarResult::p_den)
      .def_readonly("no_discordant", &mma2a::McNemarResult::no_discordant)
      .def("__repr__", [](const mma2a::McNemarResult& r) { return "McNemarResult(p=" + std::to_string(r.p) + ")"; });
  m.def("mcnemar_exact", py::overload_cast<std::size_t, std::size_t>(&mma2a::mcnemar_exact), py::arg("b"),
        py::arg("c"));

  py::class_<mma2a::BootstrapResult>(m, "BootstrapResult")
      .def_readonly("point_pp", &mma2a::BootstrapResult::point_pp)
      .def_readonly("lo_pp", &mma2a::BootstrapResult::lo_pp)
      .def_readonly("hi_pp", &mma2a::BootstrapResult::hi_pp)
      .def_readonly("resamples", &mma2a::BootstrapResult::resamples)
      .def_readonly("seed", &mma2a::BootstrapResult::seed)
      .def_readonly("level", &mma2a::BootstrapResult::level);
  m.def(
      "bootstrap_ci",
      [](const std::vector<bool>& baseline, const std::vector<bool>& treatment, std::uint64_t seed,
         std::size_t resamples, double level) {
        const auto o = outcomes_of(baseline, treatment);
        py::gil_scoped_release unlocked;
        return mma2a::bootstrap_ci(o, resamples, seed, level);
      },
      py::arg("baseline"), py::arg("treatment"), py::kw_only(), py::arg("seed"), py::arg("resamples") = 10000,
      py::arg("level") = 0.95, "Percentile bootstrap of the accuracy difference, in percentage points.");

  py::class_<mma2a::PairedTResult>(m, "PairedTResult")
      .def_readonly("t", &mma2a::PairedTResult::t)
      .def_readonly("p", &mma2a::PairedTResult::p)
      .def_readonly("df", &mma2a::PairedTResult::df)
      .def_readonly("mean_diff", &mma2a::PairedTResult::mean_diff)
      .def_readonly("sd_diff", &mma2a::PairedTResult::sd_diff);
  m.def(
      "paired_t",
      [](const std::vector<double>& baseline, const std::vector<double>& treatment) {
        return mma2a::paired_t(baseline, treatment);
      },
      py::arg("baseline"), py::arg("treatment"));

  m.def(
      "load_manifest",
      [](const fs::path& path, bool load_media) {
        mma2a::LoadOptions opts;
        opts.load_media = load_media;
        const auto bench = mma2a::load_manifest(path, opts);
        py::list tasks;
        for (const auto& t : bench.tasks) tasks.append(task_summary(t));
        return tasks;
      },
      py::arg("path"), py::arg("load_media") = false, "Validated task list; raises Error listing every violation.");

  m.def("run_experiment", &run_experiment, py::arg("manifest"), py::kw_only(), py::arg("seed"), py::arg("backend") = "scripted",
        py::arg("resamples") = 10000, py::arg("delay_profile") = "none", py::arg("baseline") = "text_bottleneck",
        py::arg("treatment") = "native", py::arg("theta") = 0,
        "Runs both arms on a local agent mesh and returns the report as a dict.");
}
