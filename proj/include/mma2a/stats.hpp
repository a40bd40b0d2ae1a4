#pragma once

// Paired-comparison statistics. Everything here is a pure function of its
// inputs; randomness comes only from the explicit bootstrap seed.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mma2a/domain.hpp"

namespace mma2a {

/// One benchmark task seen through both arms. Baseline is the text
/// bottleneck, treatment the modality-native router.
struct PairedOutcome {
  std::string task_id;
  Category category = Category::product_defect;
  bool baseline_correct = false;
  bool treatment_correct = false;
  std::chrono::nanoseconds baseline_latency{0};
  std::chrono::nanoseconds treatment_latency{0};
};

enum class Arm { baseline, treatment };

/// Throws empty_input.
double tca(std::span<const PairedOutcome> outcomes, Arm arm);

struct ContingencyTable {
  std::size_t a = 0;  // both correct
  std::size_t b = 0;  // treatment only
  std::size_t c = 0;  // baseline only
  std::size_t d = 0;  // both wrong
  std::size_t n() const noexcept { return a + b + c + d; }
  bool operator==(const ContingencyTable&) const = default;
};

ContingencyTable contingency(std::span<const PairedOutcome> outcomes);

struct McNemarResult {
  double p = 1.0;
  /// p as an exact fraction when b + c <= 62 (denominator a power of two,
  /// reduced); zero denominators mean no exact form.
  std::uint64_t p_num = 1;
  std::uint64_t p_den = 1;
  /// Set when b + c == 0; p is then defined as 1.
  bool no_discordant = false;
};

/// Two-sided exact binomial test on the discordant pairs, doubling the
/// smaller tail: p = min(1, 2 * sum_{i<=min(b,c)} C(b+c, i) / 2^(b+c)).
McNemarResult mcnemar_exact(std::size_t b, std::size_t c);
inline McNemarResult mcnemar_exact(const ContingencyTable& t) { return mcnemar_exact(t.b, t.c); }

struct BootstrapResult {
  double point_pp = 0.0;
  double lo_pp = 0.0;
  double hi_pp = 0.0;
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
};

/// Paired percentile bootstrap of treatment-minus-baseline TCA in percentage
/// points. Resample r draws from its own generator seeded from (seed, r), so
/// results do not depend on evaluation order or thread count. Percentiles use
/// lower interpolation: sorted[floor(q * (R - 1))].
BootstrapResult bootstrap_ci(std::span<const PairedOutcome> outcomes, std::size_t resamples, std::uint64_t seed,
                             double level = 0.95);

/// splitmix64 finaliser, used to derive per-resample seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct PairedTResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t df = 0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
};

/// Paired t-test on d_i = baseline_i - treatment_i, two-sided p from the t
/// distribution with n - 1 degrees of freedom. Throws empty_input (n < 2),
/// arm_mismatch (lengths differ) or zero_variance.
PairedTResult paired_t(std::span<const double> baseline, std::span<const double> treatment);

struct LatencyStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;  // lower median
  double stddev = 0.0;  // sample standard deviation
};

LatencyStats latency_stats(std::vector<double> values);

/// sorted[floor(q * (n - 1))] of an already sorted, non-empty vector.
double lower_quantile(const std::vector<double>& sorted, double q);

}  // namespace mma2a
