#pragma once

// Reference implementations used only by tests. They are written from the
// rule descriptions, deliberately without calling the library code they check.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace oracle {

inline std::string lower(std::string s) {
  for (auto& ch : s) ch = char(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

// Does any skill of the card list a mode that admits `mime`?
inline bool accepts(const std::vector<std::vector<std::string>>& skill_modes, const std::string& mime) {
  const std::string m = lower(mime);
  const std::string type = m.substr(0, m.find('/'));
  for (const auto& modes : skill_modes) {
    for (const auto& raw : modes) {
      const std::string mode = lower(raw);
      if (mode == "*/*") return true;
      if (mode == m) return true;
      if (mode.size() > 2 && mode.compare(mode.size() - 2, 2, "/*") == 0 && mode.substr(0, mode.size() - 2) == type)
        return true;
    }
  }
  return false;
}

enum class Kind { text, voice, image, data };
enum class Mode { native, text_bottleneck, adaptive };

// true: forward natively; false: transcode.
inline bool route_native(Kind kind, const std::string& mime, const std::vector<std::vector<std::string>>& card,
                         Mode mode, int theta, int priority) {
  if (kind == Kind::data) return true;
  const bool capable = accepts(card, mime);
  if (kind == Kind::text) return capable;
  switch (mode) {
    case Mode::text_bottleneck:
      return false;
    case Mode::native:
      return capable;
    case Mode::adaptive:
      if (!capable) return false;
      return priority >= theta;
  }
  return false;
}

struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
};

// Counts the sign vectors of length b + c that are at least as unbalanced as
// the observed one. Exponential; keep b + c small.
inline Fraction mcnemar_by_enumeration(unsigned b, unsigned c) {
  const unsigned n = b + c;
  if (n == 0) return {1, 1};
  const unsigned observed = std::min(b, c);
  std::uint64_t extreme = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t v = 0; v < total; ++v) {
    const unsigned ones = unsigned(__builtin_popcountll(v));
    if (std::min(ones, n - ones) <= observed) ++extreme;
  }
  const std::uint64_t g = std::gcd(extreme, total);
  return {extreme / g, total / g};
}

struct TTest {
  double t;
  double p;
};

// Paired t from the raw-sum form of the variance, p from the regularised
// incomplete beta function.
inline TTest paired_t(const std::vector<double>& baseline, const std::vector<double>& treatment) {
  const double n = double(baseline.size());
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    const double d = baseline[i] - treatment[i];
    s += d;
    s2 += d * d;
  }
  const double var = (n * s2 - s * s) / (n * (n - 1.0));
  const double t = (s / n) / std::sqrt(var / n);
  const double df = n - 1.0;
  const double p = boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
  return {t, p};
}

}  // namespace oracle
