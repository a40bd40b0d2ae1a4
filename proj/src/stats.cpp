#include "mma2a/stats.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "mma2a/error.hpp"

namespace mma2a {

double tca(std::span<const PairedOutcome> outcomes, Arm arm) {
  if (outcomes.empty()) throw Error(ErrorCode::empty_input, "tca of an empty outcome list");
  const auto correct = std::count_if(outcomes.begin(), outcomes.end(), [arm](const PairedOutcome& o) {
    return arm == Arm::baseline ? o.baseline_correct : o.treatment_correct;
  });
  return static_cast<double>(correct) / static_cast<double>(outcomes.size());
}

ContingencyTable contingency(std::span<const PairedOutcome> outcomes) {
  ContingencyTable t;
  for (const auto& o : outcomes) {
    if (o.treatment_correct && o.baseline_correct) {
      ++t.a;
    } else if (o.treatment_correct) {
      ++t.b;
    } else if (o.baseline_correct) {
      ++t.c;
    } else {
      ++t.d;
    }
  }
  return t;
}

McNemarResult mcnemar_exact(std::size_t b, std::size_t c) {
  McNemarResult r;
  const std::size_t n = b + c;
  if (n == 0) {
    r.no_discordant = true;
    return r;
  }
  const std::size_t k = std::min(b, c);
  if (n <= 62) {
    // Pascal row in exact integers; C(62, 31) < 2^63.
    std::vector<std::uint64_t> row(n + 1, 0);
    row[0] = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = i; j > 0; --j) row[j] += row[j - 1];
    }
    std::uint64_t tail = 0;
    for (std::size_t i = 0; i <= k; ++i) tail += row[i];
    std::uint64_t num = 2 * tail;
    std::uint64_t den = std::uint64_t{1} << n;
    if (num >= den) {
      num = den = 1;
    } else {
      const auto g = std::gcd(num, den);
      num /= g;
      den /= g;
    }
    r.p_num = num;
    r.p_den = den;
    r.p = static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
    return r;
  }
  // Large n: log-space sum.
  long double tail = 0.0L;
  const long double ln2n = static_cast<long double>(n) * std::log(2.0L);
  for (std::size_t i = 0; i <= k; ++i) {
    const long double lc = std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(i) + 1) -
                           std::lgamma(static_cast<long double>(n - i) + 1);
    tail += std::exp(lc - ln2n);
  }
  r.p = static_cast<double>(std::min(1.0L, 2.0L * tail));
  r.p_num = r.p_den = 0;
  return r;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

// Unbiased draw in [0, n) by rejection; the standard distributions are not
// guaranteed to produce the same sequence across library implementations.
std::size_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

}  // namespace

double lower_quantile(const std::vector<double>& sorted, double q) {
  const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted.size() - 1)));
  return sorted[std::min(idx, sorted.size() - 1)];
}

BootstrapResult bootstrap_ci(std::span<const PairedOutcome> outcomes, std::size_t resamples, std::uint64_t seed,
                             double level) {
  if (outcomes.empty()) throw Error(ErrorCode::empty_input, "bootstrap of an empty outcome list");
  if (resamples == 0) throw Error(ErrorCode::config_error, "bootstrap needs at least one resample");
  BootstrapResult r;
  r.resamples = resamples;
  r.seed = seed;
  r.level = level;
  const std::size_t n = outcomes.size();
  // Per-task contribution to the difference in correct counts: -1, 0 or +1.
  std::vector<int> delta(n);
  for (std::size_t i = 0; i < n; ++i) {
    delta[i] = int(outcomes[i].treatment_correct) - int(outcomes[i].baseline_correct);
  }
  r.point_pp = 100.0 * std::accumulate(delta.begin(), delta.end(), 0.0) / static_cast<double>(n);

  std::vector<double> stats(resamples);
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t rep = begin; rep < end; ++rep) {
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(rep)));
      long sum = 0;
      for (std::size_t i = 0; i < n; ++i) sum += delta[bounded(rng, n)];
      stats[rep] = 100.0 * static_cast<double>(sum) / static_cast<double>(n);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  const std::size_t chunk = (resamples + workers - 1) / workers;
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(resamples, begin + chunk);
    if (begin < end) jobs.push_back(std::async(std::launch::async, work, begin, end));
  }
  for (auto& j : jobs) j.get();

  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - level) / 2.0;
  r.lo_pp = lower_quantile(stats, alpha);
  r.hi_pp = lower_quantile(stats, 1.0 - alpha);
  return r;
}

PairedTResult paired_t(std::span<const double> baseline, std::span<const double> treatment) {
  if (baseline.size() != treatment.size()) {
    throw Error(ErrorCode::arm_mismatch, "paired t-test needs equal-length samples");
  }
  const std::size_t n = baseline.size();
  if (n < 2) throw Error(ErrorCode::empty_input, "paired t-test needs at least two pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = baseline[i] - treatment[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  // Latencies are whole nanoseconds, so a spread below that is rounding noise.
  if (sd <= 1e-9 * std::max(1.0, std::abs(mean))) throw Error(ErrorCode::zero_variance, "all paired differences are equal");

  PairedTResult r;
  r.df = n - 1;
  r.mean_diff = mean;
  r.sd_diff = sd;
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(r.df));
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
  return r;
}

LatencyStats latency_stats(std::vector<double> values) {
  LatencyStats s;
  s.n = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  s.median = lower_quantile(values, 0.5);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

}  // namespace mma2a
