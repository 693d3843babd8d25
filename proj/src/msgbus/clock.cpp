#include "vtui/msgbus/clock.hpp"

#include "vtui/error.hpp"

namespace vtui::msgbus {

VirtualClock::VirtualClock(Mode mode, double factor, Nanos start) : mode_(mode), factor_(factor), now_(start) {
  if (!(factor > 0.0)) throw Error(Errc::BadConfig, "clock factor must be > 0");
}

void VirtualClock::tick(Nanos dt) {
  if (dt < 0) throw Error(Errc::BadConfig, "negative clock tick");
  now_.fetch_add(dt, std::memory_order_acq_rel);
}

void VirtualClock::advance_to(Nanos t) {
  Nanos cur = now_.load(std::memory_order_acquire);
  while (t > cur && !now_.compare_exchange_weak(cur, t, std::memory_order_acq_rel)) {
  }
}

}  // namespace vtui::msgbus
