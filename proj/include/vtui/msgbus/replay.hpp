#pragma once

#include <map>
#include <optional>
#include <string>

#include "vtui/msgbus/bag.hpp"
#include "vtui/msgbus/bus.hpp"

namespace vtui::msgbus {

using TopicRemap = std::map<std::string, std::string>;

struct ReplayStats {
  std::uint64_t messages_sent = 0;
  Nanos virtual_duration = 0;
};

/// Re-publishes a bag onto a bus. Record i is released once the clock reaches
/// start + (stamp_i - bag.start) / speed. Republished envelopes come from
/// `replay:<original publisher>` and carry the release time as their stamp.
class Replayer {
 public:
  Replayer(Bus& bus, BagFile bag, Nanos start, double speed = 1.0, TopicRemap remap = {});

  /// Publishes every record due at `clock.now()`; returns how many went out.
  std::size_t pump(const VirtualClock& clock);

  std::optional<Nanos> next_release() const;
  bool done() const { return cursor_ == bag_.records.size(); }
  ReplayStats stats() const;
  const BagFile& bag() const { return bag_; }

 private:
  Nanos release_time(const Envelope& e) const;
  const std::string& mapped(const std::string& topic) const;

  Bus& bus_;
  BagFile bag_;
  Nanos start_;
  double speed_;
  TopicRemap remap_;
  std::size_t cursor_ = 0;
  std::map<std::pair<std::string, std::string>, Publisher> publishers_;
};

/// Drives a whole bag through a stepped clock, advancing the clock to each
/// release time in turn.
ReplayStats replay(Bus& bus, const BagFile& bag, VirtualClock& clock, double speed = 1.0,
                   const TopicRemap& remap = {});

}  // namespace vtui::msgbus
