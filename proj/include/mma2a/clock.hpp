#pragma once

#include <atomic>
#include <chrono>
#include <memory>

namespace mma2a {

/// Monotonic time source. Injected wherever expiry logic must be testable.
class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  using duration = std::chrono::steady_clock::duration;

  virtual ~Clock() = default;
  virtual time_point now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  time_point now() const override { return std::chrono::steady_clock::now(); }
};

/// Test clock; starts at the epoch and moves only when told to.
class ManualClock final : public Clock {
 public:
  time_point now() const override { return time_point(duration(ticks_.load())); }
  void advance(duration d) { ticks_ += d.count(); }

 private:
  std::atomic<duration::rep> ticks_{0};
};

inline std::shared_ptr<const Clock> steady_clock() {
  static const auto clock = std::make_shared<SteadyClock>();
  return clock;
}

}  // namespace mma2a
