#include "vtui/msgbus/replay.hpp"

#include <cmath>

namespace vtui::msgbus {

Replayer::Replayer(Bus& bus, BagFile bag, Nanos start, double speed, TopicRemap remap)
    : bus_(bus), bag_(std::move(bag)), start_(start), speed_(speed), remap_(std::move(remap)) {
  if (!(speed_ > 0.0) || !std::isfinite(speed_)) throw Error(Errc::BadConfig, "replay speed must be > 0");
  for (const auto& r : bag_.records) {
    if (!bag_.topics.contains(r.topic)) throw Error(Errc::BagCorrupt, "record topic not in table: " + r.topic);
  }
  // Check every remapped topic before anything is published.
  for (const auto& [topic, tag] : bag_.topics) {
    const auto& target = mapped(topic);
    if (!valid_topic_name(target)) throw Error(Errc::BadTopicName, target);
    if (auto existing = bus_.type_tag(target); existing && *existing != tag) {
      throw Error(Errc::TypeTagConflict, target + " is " + *existing + ", bag has " + tag);
    }
  }
}

const std::string& Replayer::mapped(const std::string& topic) const {
  auto it = remap_.find(topic);
  return it == remap_.end() ? topic : it->second;
}

Nanos Replayer::release_time(const Envelope& e) const {
  return start_ + static_cast<Nanos>(std::llround(static_cast<double>(e.stamp - bag_.start) / speed_));
}

std::optional<Nanos> Replayer::next_release() const {
  if (done()) return std::nullopt;
  return release_time(bag_.records[cursor_]);
}

std::size_t Replayer::pump(const VirtualClock& clock) {
  std::size_t sent = 0;
  const Nanos now = clock.now();
  while (!done() && release_time(bag_.records[cursor_]) <= now) {
    const auto& r = bag_.records[cursor_];
    const auto& topic = mapped(r.topic);
    auto key = std::make_pair(r.publisher, topic);
    auto it = publishers_.find(key);
    if (it == publishers_.end()) {
      it = publishers_.emplace(key, bus_.advertise("replay:" + r.publisher, topic, r.type_tag)).first;
    }
    bus_.publish(it->second, r.payload, clock);
    ++cursor_;
    ++sent;
  }
  return sent;
}

ReplayStats Replayer::stats() const {
  return {cursor_, static_cast<Nanos>(std::llround(static_cast<double>(bag_.duration) / speed_))};
}

ReplayStats replay(Bus& bus, const BagFile& bag, VirtualClock& clock, double speed, const TopicRemap& remap) {
  Replayer r(bus, bag, clock.now(), speed, remap);
  while (auto next = r.next_release()) {
    clock.advance_to(*next);
    r.pump(clock);
  }
  return r.stats();
}

}  // namespace vtui::msgbus
