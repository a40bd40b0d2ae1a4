#include <doctest.h>

#include "mma2a/error.hpp"
#include "mma2a/report.hpp"

using namespace mma2a;
using namespace std::chrono_literals;

namespace {

TaskResult result(const std::string& id, Category c, const std::string& arm, bool correct, std::chrono::nanoseconds lat) {
  TaskResult r;
  r.task_id = id;
  r.category = c;
  r.arm = arm;
  r.correct = correct;
  r.decision = ActionDecision{correct ? Action::order_part : Action::escalate_to_specialist, 0.9, ""};
  r.e2e_latency = lat;
  r.input_digest = "digest-" + id;
  return r;
}

struct Fixture {
  std::vector<TaskResult> base, treat;
  std::vector<RoutingDecision> base_tel, treat_tel;

  Fixture() {
    // 8 tasks: a=2, b=4, c=1, d=1
    const bool bc[] = {true, true, false, false, false, false, true, false};
    const bool tc[] = {true, true, true, true, true, true, false, false};
    for (int i = 0; i < 8; ++i) {
      const auto cat = i < 4 ? Category::product_defect : Category::visual_troubleshooting;
      const auto id = "task_" + std::to_string(i);
      base.push_back(result(id, cat, "baseline", bc[i], 1000ms + i * 10ms));
      treat.push_back(result(id, cat, "treatment", tc[i], 1700ms + i * 13ms));
      base_tel.push_back({id, Modality::image, "vision", RouteOutcome::transcoded, TranscoderKind::image_caption, 0, 0ns});
      treat_tel.push_back({id, Modality::image, "vision", RouteOutcome::native, std::nullopt, 0, 0ns});
    }
  }

  ReportInputs inputs() const {
    ReportInputs in;
    in.backend = "scripted";
    in.baseline = base;
    in.treatment = treat;
    in.baseline_telemetry = base_tel;
    in.treatment_telemetry = treat_tel;
    in.error_labels["task_6"] = {"policy_misapplication", "synthesis"};
    in.seed = 9;
    in.resamples = 1000;
    return in;
  }
};

}  // namespace

TEST_CASE("report numbers") {
  Fixture f;
  const auto r = build_report(f.inputs());
  CHECK(r.baseline.correct == 3);
  CHECK(r.treatment.correct == 6);
  CHECK(r.delta_tca_pp == doctest::Approx(37.5));
  CHECK(r.table == ContingencyTable{2, 4, 1, 1});
  CHECK(r.mcnemar.p_num == 3);
  CHECK(r.mcnemar.p_den == 8);
  REQUIRE(r.latency_t);
  CHECK(r.latency_t->t < 0);
  REQUIRE(r.categories.size() == 2);
  CHECK(r.categories[0].category == Category::product_defect);
  CHECK(r.categories[0].treatment_correct == 4);
  CHECK(r.categories[1].baseline_pct() == doctest::Approx(25.0));
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].failure_mode == "policy_misapplication");
  CHECK(r.unlabeled_errors == 1);
  CHECK(r.treatment.routing.at(Modality::image).native == 8);
  CHECK(r.baseline.routing.at(Modality::image).transcoded == 8);
}

TEST_CASE("report json and markdown agree") {
  Fixture f;
  const auto r = build_report(f.inputs());
  const Json j = report_to_json(r);
  for (const char* key : {"arms", "contingency", "mcnemar", "bootstrap", "latency_t", "categories", "errors"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["contingency"]["b_treatment_only"] == 4);
  CHECK(j["bootstrap"]["seed"] == 9);

  const auto md = render_markdown(r);
  for (const char* heading : {"## Main results", "## Significance", "## Accuracy by category", "## Routing profile"}) {
    CHECK_MESSAGE(md.find(heading) != std::string::npos, heading);
  }
  CHECK(md.find("Text-BN") != std::string::npos);
  CHECK(md.find("MMA2A") != std::string::npos);
  CHECK(md.find("policy_misapplication") != std::string::npos);
  // The markdown carries the same McNemar p as the JSON.
  CHECK(md.find("0.375") != std::string::npos);
}

TEST_CASE("mismatched arms are refused") {
  Fixture f;
  auto in = f.inputs();
  std::vector<TaskResult> short_treat(f.treat.begin(), f.treat.end() - 1);
  in.treatment = short_treat;
  try {
    build_report(in);
    FAIL("expected arm_mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::arm_mismatch);
  }

  std::vector<TaskResult> tampered = f.treat;
  tampered[3].input_digest = "other";
  in.treatment = tampered;
  CHECK_THROWS_AS(build_report(in), Error);

  in.baseline = {};
  in.treatment = {};
  CHECK_THROWS_AS(build_report(in), Error);
}

TEST_CASE("constant latency differences drop the t-test") {
  Fixture f;
  for (std::size_t i = 0; i < f.base.size(); ++i) f.treat[i].e2e_latency = f.base[i].e2e_latency + 100ms;
  const auto r = build_report(f.inputs());
  CHECK_FALSE(r.latency_t.has_value());
  CHECK(report_to_json(r)["latency_t"].is_null());
}

TEST_CASE("ablation grid") {
  Fixture f;
  std::vector<AblationRow> rows(1);
  rows[0].backend = BackendKind::scripted;
  rows[0].run.baseline.results = f.base;
  rows[0].run.treatment.results = f.treat;
  rows[0].run.outcomes = pair_outcomes(f.base, f.treat);
  const auto rep = build_ablation_report(rows, std::nullopt);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].backend == "scripted");
  CHECK(rep.rows[0].delta_pp == doctest::Approx(37.5));
  CHECK_FALSE(rep.rows[0].invariance.has_value());
  CHECK(ablation_to_json(rep)["rows"].size() == 1);
  CHECK(render_ablation_markdown(rep).find("scripted") != std::string::npos);
}
