#pragma once

#include <atomic>
#include <cstdint>

namespace vtui::msgbus {

/// Virtual time in nanoseconds.
using Nanos = std::int64_t;

constexpr Nanos kNanosPerSecond = 1'000'000'000;

inline constexpr Nanos seconds_to_nanos(double s) {
  return static_cast<Nanos>(s * 1e9 + (s >= 0 ? 0.5 : -0.5));
}
inline constexpr double nanos_to_seconds(Nanos ns) { return static_cast<double>(ns) * 1e-9; }

/// Simulation-owned clock. Time only moves forward and only through tick()
/// or advance_to(); realtime mode differs solely in how the runtime paces
/// those calls against the wall clock.
class VirtualClock {
 public:
  enum class Mode { Stepped, RealtimeScaled };

  VirtualClock() = default;

  static VirtualClock stepped(Nanos start = 0) { return VirtualClock(Mode::Stepped, 1.0, start); }
  static VirtualClock realtime(double factor, Nanos start = 0) {
    return VirtualClock(Mode::RealtimeScaled, factor, start);
  }

  VirtualClock(const VirtualClock& o) : mode_(o.mode_), factor_(o.factor_), now_(o.now()) {}
  VirtualClock& operator=(const VirtualClock& o) {
    mode_ = o.mode_;
    factor_ = o.factor_;
    now_.store(o.now());
    return *this;
  }

  Nanos now() const noexcept { return now_.load(std::memory_order_acquire); }
  Mode mode() const noexcept { return mode_; }
  double factor() const noexcept { return factor_; }

  void tick(Nanos dt);
  /// Moves to t if t is ahead of now; never moves backwards.
  void advance_to(Nanos t);

 private:
  VirtualClock(Mode mode, double factor, Nanos start);

  Mode mode_ = Mode::Stepped;
  double factor_ = 1.0;
  std::atomic<Nanos> now_{0};
};

}  // namespace vtui::msgbus
