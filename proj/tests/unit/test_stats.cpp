#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "mma2a/error.hpp"
#include "mma2a/stats.hpp"

using namespace mma2a;
using namespace std::chrono_literals;

namespace {

std::vector<PairedOutcome> outcomes(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
  std::vector<PairedOutcome> out;
  const auto add = [&](std::size_t n, bool base, bool treat) {
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({"t" + std::to_string(out.size()), Category::product_defect, base, treat, 1s, 1s});
    }
  };
  add(a, true, true);
  add(b, false, true);
  add(c, true, false);
  add(d, false, false);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mma2a::Error");
  return ErrorCode::structural;
}

}  // namespace

TEST_CASE("task completion accuracy and contingency") {
  const auto o = outcomes(15, 11, 1, 23);
  CHECK(tca(o, Arm::baseline) == doctest::Approx(0.32));
  CHECK(tca(o, Arm::treatment) == doctest::Approx(0.52));
  CHECK(contingency(o) == ContingencyTable{15, 11, 1, 23});
  CHECK(contingency(o).n() == 50);
  CHECK(code_of([] { tca({}, Arm::baseline); }) == ErrorCode::empty_input);
}

TEST_CASE("exact McNemar agrees with enumeration") {
  for (unsigned b = 0; b <= 9; ++b) {
    for (unsigned c = 0; c <= 9; ++c) {
      const auto got = mcnemar_exact(b, c);
      const auto want = oracle::mcnemar_by_enumeration(b, c);
      CHECK(got.p_num == want.num);
      CHECK(got.p_den == want.den);
      CHECK(got.p == doctest::Approx(double(want.num) / double(want.den)));
      CHECK(got.no_discordant == (b + c == 0));
    }
  }
  const auto r = mcnemar_exact(11, 1);
  CHECK(r.p_num == 13);
  CHECK(r.p_den == 2048);
  CHECK(mcnemar_exact(6, 6).p == 1.0);
  // Symmetric in b and c.
  CHECK(mcnemar_exact(40, 3).p == mcnemar_exact(3, 40).p);
}

TEST_CASE("large discordant counts stay finite") {
  const auto r = mcnemar_exact(400, 300);
  CHECK(r.p > 0.0);
  CHECK(r.p < 0.01);
  CHECK(r.p_den == 0);
}

TEST_CASE("bootstrap is reproducible and ordered") {
  const auto o = outcomes(15, 11, 1, 23);
  const auto a = bootstrap_ci(o, 2000, 42);
  const auto b = bootstrap_ci(o, 2000, 42);
  CHECK(a.lo_pp == b.lo_pp);
  CHECK(a.hi_pp == b.hi_pp);
  CHECK(a.point_pp == doctest::Approx(20.0));
  CHECK(a.lo_pp <= a.point_pp);
  CHECK(a.point_pp <= a.hi_pp);
  CHECK(a.resamples == 2000);
  CHECK(a.seed == 42);

  // All differences equal: the interval collapses.
  const auto flat = bootstrap_ci(outcomes(10, 0, 0, 10), 500, 1);
  CHECK(flat.lo_pp == 0.0);
  CHECK(flat.hi_pp == 0.0);
  CHECK(code_of([] { bootstrap_ci({}, 10, 1); }) == ErrorCode::empty_input);
  CHECK(splitmix64(1) != splitmix64(2));
}

TEST_CASE("paired t agrees with the raw-sum oracle") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 60;
    std::vector<double> base(n), treat(n);
    for (std::size_t i = 0; i < n; ++i) {
      base[i] = 1.0 + noise(rng);
      treat[i] = 1.5 + noise(rng);
    }
    const auto got = paired_t(base, treat);
    const auto want = oracle::paired_t(base, treat);
    CHECK(got.df == n - 1);
    CHECK(got.t == doctest::Approx(want.t).epsilon(1e-9));
    CHECK(got.p == doctest::Approx(want.p).epsilon(1e-9));
  }
}

TEST_CASE("paired t refuses degenerate input") {
  const std::vector<double> one{1.0};
  const std::vector<double> two{1.0, 2.0};
  const std::vector<double> three{1.0, 2.0, 3.0};
  const std::vector<double> shifted{2.0, 3.0};
  CHECK(code_of([&] { paired_t(one, one); }) == ErrorCode::empty_input);
  CHECK(code_of([&] { paired_t(two, three); }) == ErrorCode::arm_mismatch);
  CHECK(code_of([&] { paired_t(two, shifted); }) == ErrorCode::zero_variance);
}

TEST_CASE("latency summaries") {
  const auto s = latency_stats({4.0, 1.0, 3.0, 2.0});
  CHECK(s.n == 4);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.median == 2.0);  // lower median
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(latency_stats({7.0}).stddev == 0.0);
  CHECK(latency_stats({}).n == 0);

  const std::vector<double> sorted{1, 2, 3, 4, 5};
  CHECK(lower_quantile(sorted, 0.0) == 1);
  CHECK(lower_quantile(sorted, 0.5) == 3);
  CHECK(lower_quantile(sorted, 0.99) == 4);
  CHECK(lower_quantile(sorted, 1.0) == 5);
}
