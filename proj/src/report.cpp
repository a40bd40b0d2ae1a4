#include "mma2a/report.hpp"

#include <algorithm>
#include <cstdio>

#include "mma2a/error.hpp"

namespace mma2a {

namespace {

double seconds(std::chrono::nanoseconds ns) { return static_cast<double>(ns.count()) / 1e9; }

ArmSummary summarize_arm(const std::string& arm, const std::string& mode, std::span<const TaskResult> results,
                         std::span<const RoutingDecision> telemetry) {
  ArmSummary s;
  s.arm = arm;
  s.mode = mode;
  s.n = results.size();
  std::vector<double> lat;
  for (const auto& r : results) {
    s.correct += r.correct ? 1 : 0;
    lat.push_back(seconds(r.e2e_latency));
  }
  s.tca_pct = s.n ? 100.0 * double(s.correct) / double(s.n) : 0.0;
  s.latency_s = latency_stats(std::move(lat));
  s.routing = routing_profile(telemetry);
  return s;
}

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string signed_fmt(double v, int decimals) {
  std::string s = fmt(v, decimals);
  if (s.front() != '-') s.insert(s.begin(), '+');
  return s;
}

std::string count_pct(std::size_t k, std::size_t total) {
  const double pct = total ? 100.0 * double(k) / double(total) : 0.0;
  return std::to_string(k) + " (" + fmt(pct, 0) + "%)";
}

std::string arm_label(const std::string& mode) {
  if (mode == "text_bottleneck") return "Text-BN";
  if (mode == "native") return "MMA2A";
  return "MMA2A (" + mode + ")";
}

Json latency_json(const LatencyStats& s) {
  return Json{{"n", s.n}, {"mean", s.mean}, {"median", s.median}, {"stddev", s.stddev}};
}

Json counts_json(const OutcomeCounts& c) { return Json{{"native", c.native}, {"transcoded", c.transcoded}}; }

Json routing_json(const RoutingProfile& p) {
  Json j = Json::object();
  for (auto m : {Modality::voice, Modality::image, Modality::text, Modality::data}) {
    const auto c = p.at(m);
    if (c.total() > 0 || m != Modality::data) j[std::string(to_string(m))] = counts_json(c);
  }
  j["total"] = counts_json(p.totals());
  j["native_pct"] = 100.0 * p.native_fraction();
  return j;
}

Json arm_json(const ArmSummary& a) {
  return Json{{"mode", a.mode},          {"n", a.n},
              {"correct", a.correct},    {"tca_pct", a.tca_pct},
              {"latency_s", latency_json(a.latency_s)}, {"routing", routing_json(a.routing)}};
}

}  // namespace

std::map<std::string, ErrorLabel> error_labels_of(const Benchmark& bench) {
  std::map<std::string, ErrorLabel> out;
  for (const auto& t : bench.tasks) {
    if (t.error_label) out[t.task_id] = *t.error_label;
  }
  return out;
}

ReportBundle build_report(const ReportInputs& in) {
  const auto outcomes = pair_outcomes(in.baseline, in.treatment);
  if (outcomes.empty()) throw Error(ErrorCode::empty_input, "no paired outcomes to report");

  ReportBundle r;
  r.backend = in.backend;
  r.seed = in.seed;
  r.baseline = summarize_arm("baseline", in.baseline_mode, in.baseline, in.baseline_telemetry);
  r.treatment = summarize_arm("treatment", in.treatment_mode, in.treatment, in.treatment_telemetry);
  r.delta_tca_pp = r.treatment.tca_pct - r.baseline.tca_pct;
  r.table = contingency(outcomes);
  if (r.table.a + r.table.b != r.treatment.correct || r.table.a + r.table.c != r.baseline.correct) {
    throw Error(ErrorCode::invariant_violation, "contingency table disagrees with per-arm correct counts");
  }
  r.mcnemar = mcnemar_exact(r.table);
  r.bootstrap = bootstrap_ci(outcomes, in.resamples, in.seed);

  std::vector<double> lb, lt;
  for (const auto& o : outcomes) {
    lb.push_back(seconds(o.baseline_latency));
    lt.push_back(seconds(o.treatment_latency));
  }
  try {
    r.latency_t = paired_t(lb, lt);
  } catch (const Error&) {
    r.latency_t.reset();
  }

  for (auto cat : kAllCategories) {
    CategoryRow row;
    row.category = cat;
    std::vector<double> cb, ct;
    for (const auto& o : outcomes) {
      if (o.category != cat) continue;
      ++row.n;
      row.baseline_correct += o.baseline_correct;
      row.treatment_correct += o.treatment_correct;
      cb.push_back(seconds(o.baseline_latency));
      ct.push_back(seconds(o.treatment_latency));
    }
    if (row.n == 0) continue;
    row.baseline_latency_s = latency_stats(std::move(cb));
    row.treatment_latency_s = latency_stats(std::move(ct));
    r.categories.push_back(row);
  }

  std::map<std::pair<std::string, std::string>, std::size_t> errs;
  for (const auto& t : in.treatment) {
    if (t.correct) continue;
    auto it = in.error_labels.find(t.task_id);
    if (it == in.error_labels.end()) {
      ++r.unlabeled_errors;
    } else {
      ++errs[{it->second.failure_mode, it->second.layer}];
    }
  }
  for (const auto& [key, n] : errs) r.errors.push_back(ErrorRow{key.first, key.second, n});
  std::stable_sort(r.errors.begin(), r.errors.end(), [](const ErrorRow& x, const ErrorRow& y) { return x.n > y.n; });
  return r;
}

Json report_to_json(const ReportBundle& r) {
  Json j;
  j["schema_version"] = 1;
  j["backend"] = r.backend;
  j["seed"] = r.seed;
  j["arms"] = Json{{"baseline", arm_json(r.baseline)}, {"treatment", arm_json(r.treatment)}};
  j["delta_tca_pp"] = r.delta_tca_pp;
  j["contingency"] = Json{{"a_both_correct", r.table.a},
                          {"b_treatment_only", r.table.b},
                          {"c_baseline_only", r.table.c},
                          {"d_both_wrong", r.table.d},
                          {"n", r.table.n()}};
  j["mcnemar"] = Json{{"p", r.mcnemar.p}, {"no_discordant", r.mcnemar.no_discordant}};
  if (r.mcnemar.p_den) {
    j["mcnemar"]["p_exact"] = std::to_string(r.mcnemar.p_num) + "/" + std::to_string(r.mcnemar.p_den);
  } else {
    j["mcnemar"]["p_exact"] = nullptr;
  }
  j["bootstrap"] = Json{{"method", "percentile"},
                        {"quantile_rule", "lower"},
                        {"level", r.bootstrap.level},
                        {"resamples", r.bootstrap.resamples},
                        {"seed", r.bootstrap.seed},
                        {"point_pp", r.bootstrap.point_pp},
                        {"lo_pp", r.bootstrap.lo_pp},
                        {"hi_pp", r.bootstrap.hi_pp}};
  if (r.latency_t) {
    j["latency_t"] = Json{{"t", r.latency_t->t},
                          {"p", r.latency_t->p},
                          {"df", r.latency_t->df},
                          {"mean_diff_s", r.latency_t->mean_diff},
                          {"sd_diff_s", r.latency_t->sd_diff}};
  } else {
    j["latency_t"] = nullptr;
  }
  j["categories"] = Json::array();
  for (const auto& c : r.categories) {
    j["categories"].push_back({{"category", to_string(c.category)},
                               {"n", c.n},
                               {"baseline_correct", c.baseline_correct},
                               {"treatment_correct", c.treatment_correct},
                               {"baseline_pct", c.baseline_pct()},
                               {"treatment_pct", c.treatment_pct()},
                               {"delta_pp", c.treatment_pct() - c.baseline_pct()},
                               {"latency_s",
                                {{"baseline", latency_json(c.baseline_latency_s)},
                                 {"treatment", latency_json(c.treatment_latency_s)}}}});
  }
  j["errors"] = Json::array();
  for (const auto& e : r.errors) j["errors"].push_back({{"failure_mode", e.failure_mode}, {"layer", e.layer}, {"n", e.n}});
  j["unlabeled_errors"] = r.unlabeled_errors;
  return j;
}

std::string render_markdown(const ReportBundle& r) {
  const auto bl = arm_label(r.baseline.mode);
  const auto tl = arm_label(r.treatment.mode);
  std::string md;
  md += "# Paired routing experiment\n\n";
  md += "Backend: `" + r.backend + "`. Bootstrap seed: " + std::to_string(r.seed) + ".\n\n";

  md += "## Main results\n\n";
  md += "| System | TCA (%) | Latency (s) | Native routing (%) |\n|---|---|---|---|\n";
  for (const auto* a : {&r.baseline, &r.treatment}) {
    md += "| " + arm_label(a->mode) + " | " + fmt(a->tca_pct, 1) + " | " + fmt(a->latency_s.mean, 3) + " ± " +
          fmt(a->latency_s.stddev, 3) + " | " + fmt(100.0 * a->routing.native_fraction(), 1) + " |\n";
  }
  md += "| Δ | " + signed_fmt(r.delta_tca_pp, 1) + " pp | " +
        signed_fmt(r.treatment.latency_s.mean - r.baseline.latency_s.mean, 3) + " s | " +
        signed_fmt(100.0 * (r.treatment.routing.native_fraction() - r.baseline.routing.native_fraction()), 1) +
        " pp |\n\n";

  md += "## Significance\n\n";
  md += "| | " + tl + " correct | " + tl + " wrong |\n|---|---|---|\n";
  md += "| " + bl + " correct | " + std::to_string(r.table.a) + " | " + std::to_string(r.table.c) + " |\n";
  md += "| " + bl + " wrong | " + std::to_string(r.table.b) + " | " + std::to_string(r.table.d) + " |\n\n";
  md += "- Discordant pairs: " + std::to_string(r.table.b) + " favour " + tl + ", " + std::to_string(r.table.c) +
        " favour " + bl + ".\n";
  md += "- McNemar exact p = " + fmt(r.mcnemar.p, 3);
  if (r.mcnemar.p_den) md += " (" + std::to_string(r.mcnemar.p_num) + "/" + std::to_string(r.mcnemar.p_den) + ")";
  if (r.mcnemar.no_discordant) md += " (no discordant pairs)";
  md += ".\n";
  md += "- Paired bootstrap (" + std::to_string(r.bootstrap.resamples) + " resamples, percentile) " +
        fmt(100.0 * r.bootstrap.level, 0) + "% CI on ΔTCA: [" + fmt(r.bootstrap.lo_pp, 1) + ", " +
        fmt(r.bootstrap.hi_pp, 1) + "] pp.\n";
  if (r.latency_t) {
    md += "- Paired t-test on latency (" + bl + " − " + tl + "): t = " + fmt(r.latency_t->t, 2) +
          ", df = " + std::to_string(r.latency_t->df) + ", p " +
          (r.latency_t->p < 0.001 ? std::string("< 0.001") : "= " + fmt(r.latency_t->p, 3)) + ".\n";
  } else {
    md += "- Paired t-test on latency: undefined (fewer than two pairs or zero variance).\n";
  }
  md += "\n";

  md += "## Accuracy by category\n\n";
  md += "| Category | n | " + bl + " | " + tl + " | Δ |\n|---|---|---|---|---|\n";
  for (const auto& c : r.categories) {
    md += "| " + std::string(display_name(c.category)) + " | " + std::to_string(c.n) + " | " + fmt(c.baseline_pct(), 1) +
          " (" + std::to_string(c.baseline_correct) + ") | " + fmt(c.treatment_pct(), 1) + " (" +
          std::to_string(c.treatment_correct) + ") | " + signed_fmt(c.treatment_pct() - c.baseline_pct(), 1) + " pp |\n";
  }
  md += "\n";

  md += "## Routing profile\n\n";
  md += "| Modality | " + tl + " native | " + tl + " transcode | " + bl + " native | " + bl + " transcode |\n";
  md += "|---|---|---|---|---|\n";
  const auto routing_row = [&](const std::string& name, const OutcomeCounts& t, const OutcomeCounts& b) {
    md += "| " + name + " | " + count_pct(t.native, t.total()) + " | " + count_pct(t.transcoded, t.total()) + " | " +
          count_pct(b.native, b.total()) + " | " + count_pct(b.transcoded, b.total()) + " |\n";
  };
  for (auto m : {Modality::voice, Modality::image, Modality::text, Modality::data}) {
    const auto t = r.treatment.routing.at(m);
    const auto b = r.baseline.routing.at(m);
    if (m == Modality::data && t.total() == 0 && b.total() == 0) continue;
    std::string name(to_string(m));
    name.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(name.front())));
    routing_row(name, t, b);
  }
  routing_row("**Total**", r.treatment.routing.totals(), r.baseline.routing.totals());
  md += "\n";

  md += "## Latency by category (s)\n\n";
  md += "| Category | Mean " + bl + " | Mean " + tl + " | Median " + bl + " | Median " + tl + " |\n";
  md += "|---|---|---|---|---|\n";
  for (const auto& c : r.categories) {
    md += "| " + std::string(display_name(c.category)) + " | " + fmt(c.baseline_latency_s.mean, 3) + " | " +
          fmt(c.treatment_latency_s.mean, 3) + " | " + fmt(c.baseline_latency_s.median, 3) + " | " +
          fmt(c.treatment_latency_s.median, 3) + " |\n";
  }
  md += "| **Overall** | " + fmt(r.baseline.latency_s.mean, 3) + " | " + fmt(r.treatment.latency_s.mean, 3) + " | " +
        fmt(r.baseline.latency_s.median, 3) + " | " + fmt(r.treatment.latency_s.median, 3) + " |\n\n";

  md += "## " + tl + " failures by labelled mode\n\n";
  md += "| Failure mode | n | Layer |\n|---|---|---|\n";
  for (const auto& e : r.errors) md += "| " + e.failure_mode + " | " + std::to_string(e.n) + " | " + e.layer + " |\n";
  if (r.unlabeled_errors) md += "| (unlabelled) | " + std::to_string(r.unlabeled_errors) + " | |\n";
  return md;
}

AblationReport build_ablation_report(std::span<const AblationRow> rows, const std::optional<KeywordRuleTable>& rules) {
  AblationReport rep;
  for (const auto& row : rows) {
    AblationReport::Row out;
    out.backend = std::string(to_string(row.backend));
    out.n = row.run.outcomes.size();
    for (const auto& o : row.run.outcomes) {
      out.baseline_correct += o.baseline_correct;
      out.treatment_correct += o.treatment_correct;
    }
    if (out.n) {
      out.baseline_pct = 100.0 * double(out.baseline_correct) / double(out.n);
      out.treatment_pct = 100.0 * double(out.treatment_correct) / double(out.n);
    }
    out.delta_pp = out.treatment_pct - out.baseline_pct;
    if (row.backend == BackendKind::keyword && rules) out.invariance = keyword_invariance(row.run, *rules);
    rep.rows.push_back(std::move(out));
  }
  return rep;
}

Json ablation_to_json(const AblationReport& r) {
  Json j{{"schema_version", 1}, {"rows", Json::array()}};
  for (const auto& row : r.rows) {
    Json jr{{"backend", row.backend},
            {"n", row.n},
            {"baseline_correct", row.baseline_correct},
            {"treatment_correct", row.treatment_correct},
            {"baseline_pct", row.baseline_pct},
            {"treatment_pct", row.treatment_pct},
            {"delta_pp", row.delta_pp}};
    if (row.invariance) {
      jr["keyword_invariance"] = {{"tasks", row.invariance->tasks},
                                  {"equal_keyword_sets", row.invariance->equal_keyword_sets},
                                  {"identical_responses", row.invariance->identical_responses},
                                  {"identical_rate", row.invariance->identical_rate()},
                                  {"violations", row.invariance->violations}};
    }
    j["rows"].push_back(std::move(jr));
  }
  return j;
}

std::string render_ablation_markdown(const AblationReport& r) {
  std::string md = "# Decision-step ablation\n\n";
  md += "| Decision step | Text-BN | MMA2A | Δ |\n|---|---|---|---|\n";
  for (const auto& row : r.rows) {
    md += "| " + row.backend + " | " + fmt(row.baseline_pct, 1) + "% | " + fmt(row.treatment_pct, 1) + "% | " +
          signed_fmt(row.delta_pp, 1) + " pp |\n";
  }
  for (const auto& row : r.rows) {
    if (!row.invariance) continue;
    const auto& k = *row.invariance;
    md += "\nKeyword backend: " + std::to_string(k.identical_responses) + " of " + std::to_string(k.tasks) +
          " tasks gave identical responses in both arms (" + fmt(100.0 * k.identical_rate(), 1) + "%); " +
          std::to_string(k.equal_keyword_sets) + " had equal keyword sets, with " + std::to_string(k.violations.size()) +
          " invariance violation(s).\n";
  }
  return md;
}

}  // namespace mma2a
