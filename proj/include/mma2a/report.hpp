#pragma once

// Comparison report: every number is computed here once and then rendered to
// both report.json and report.md.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mma2a/benchmark.hpp"
#include "mma2a/experiment.hpp"
#include "mma2a/router.hpp"
#include "mma2a/stats.hpp"

namespace mma2a {

struct ArmSummary {
  std::string arm;
  std::string mode;
  std::size_t n = 0;
  std::size_t correct = 0;
  double tca_pct = 0.0;
  LatencyStats latency_s;
  RoutingProfile routing;
};

struct CategoryRow {
  Category category = Category::product_defect;
  std::size_t n = 0;
  std::size_t baseline_correct = 0;
  std::size_t treatment_correct = 0;
  LatencyStats baseline_latency_s;
  LatencyStats treatment_latency_s;
  double baseline_pct() const { return n ? 100.0 * double(baseline_correct) / double(n) : 0.0; }
  double treatment_pct() const { return n ? 100.0 * double(treatment_correct) / double(n) : 0.0; }
};

struct ErrorRow {
  std::string failure_mode;
  std::string layer;
  std::size_t n = 0;
};

struct ReportBundle {
  std::string backend;
  std::uint64_t seed = 0;
  ArmSummary baseline;
  ArmSummary treatment;
  double delta_tca_pp = 0.0;
  ContingencyTable table;
  McNemarResult mcnemar;
  BootstrapResult bootstrap;
  std::optional<PairedTResult> latency_t;  // absent when undefined (zero variance, n < 2)
  std::vector<CategoryRow> categories;     // categories with no tasks are omitted
  std::vector<ErrorRow> errors;            // treatment-arm failures by operator label
  std::size_t unlabeled_errors = 0;
};

struct ReportInputs {
  std::string backend;
  std::string baseline_mode = "text_bottleneck";
  std::string treatment_mode = "native";
  std::span<const TaskResult> baseline;
  std::span<const TaskResult> treatment;
  std::span<const RoutingDecision> baseline_telemetry;
  std::span<const RoutingDecision> treatment_telemetry;
  /// task id -> operator-supplied failure label
  std::map<std::string, ErrorLabel> error_labels;
  std::uint64_t seed = 0;
  std::size_t resamples = 10'000;
};

/// Throws arm_mismatch or empty_input.
ReportBundle build_report(const ReportInputs& inputs);

Json report_to_json(const ReportBundle& r);
std::string render_markdown(const ReportBundle& r);

std::map<std::string, ErrorLabel> error_labels_of(const Benchmark& bench);

/// Keyword-vs-scripted grid (treatment and baseline TCA per backend).
struct AblationReport {
  struct Row {
    std::string backend;
    std::size_t n = 0;
    std::size_t baseline_correct = 0;
    std::size_t treatment_correct = 0;
    double baseline_pct = 0.0;
    double treatment_pct = 0.0;
    double delta_pp = 0.0;
    std::optional<KeywordInvariance> invariance;
  };
  std::vector<Row> rows;
};

AblationReport build_ablation_report(std::span<const AblationRow> rows, const std::optional<KeywordRuleTable>& rules);
Json ablation_to_json(const AblationReport& r);
std::string render_ablation_markdown(const AblationReport& r);

}  // namespace mma2a
