#pragma once

// Payloads of the device topics. Each struct carries the type_tag its topic
// is registered with; encodings are little-endian, see docs/wire-protocol.md.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtui/math.hpp"
#include "vtui/msgbus/clock.hpp"
#include "vtui/wire.hpp"

namespace vtui::devices {

using msgbus::Nanos;

struct AccelSample {
  static constexpr std::string_view type_tag = "AccelSample";
  Nanos stamp = 0;
  /// Proper acceleration in the device frame, m/s².
  Vec3 proper_acceleration = Vec3::Zero();
  bool operator==(const AccelSample&) const = default;
};

struct ProximitySample {
  static constexpr std::string_view type_tag = "ProximitySample";
  Nanos stamp = 0;
  /// Empty when nothing is within range.
  std::optional<double> distance;
  bool in_range() const { return distance.has_value(); }
  bool operator==(const ProximitySample&) const = default;
};

struct ContactEvent {
  std::uint32_t other_body = 0;
  std::string other_name;
  Vec3 point = Vec3::Zero();
  /// Direction of the push on the device's link.
  Vec3 normal = Vec3::UnitZ();
  /// Normal impulse over the step divided by dt, N.
  double force = 0.0;
  bool operator==(const ContactEvent&) const = default;
};

struct ContactSample {
  static constexpr std::string_view type_tag = "ContactSample";
  Nanos stamp = 0;
  std::vector<ContactEvent> contacts;
  double total_force() const;
  bool operator==(const ContactSample&) const = default;
};

struct DisplayFrame {
  static constexpr std::string_view type_tag = "DisplayFrame";
  std::string display_id;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  /// Row-major RGB8, width * height * 3 bytes.
  std::vector<std::uint8_t> pixels;

  static DisplayFrame filled(std::string id, std::uint32_t w, std::uint32_t h, std::uint8_t r, std::uint8_t g,
                             std::uint8_t b);
  bool consistent() const { return pixels.size() == std::size_t{width} * height * 3; }
  bool operator==(const DisplayFrame&) const = default;
};

enum class TouchPhase : std::uint8_t { Down = 0, Move = 1, Up = 2 };
enum class TouchSource : std::uint8_t { Contact = 0, Ui = 1 };

struct TouchEvent {
  static constexpr std::string_view type_tag = "TouchEvent";
  std::string display_id;
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  TouchPhase phase = TouchPhase::Down;
  TouchSource source = TouchSource::Ui;
  bool operator==(const TouchEvent&) const = default;
};

struct BatteryState {
  static constexpr std::string_view type_tag = "BatteryState";
  Nanos stamp = 0;
  double charge_fraction = 1.0;
  bool depleted = false;
  bool operator==(const BatteryState&) const = default;
};

/// Sent on a battery's cmd channel: adds charge, J.
struct BatteryCommand {
  static constexpr std::string_view type_tag = "BatteryCommand";
  double charge_j = 0.0;
  bool operator==(const BatteryCommand&) const = default;
};

wire::Bytes encode(const AccelSample& m);
wire::Bytes encode(const ProximitySample& m);
wire::Bytes encode(const ContactSample& m);
wire::Bytes encode(const DisplayFrame& m);
wire::Bytes encode(const TouchEvent& m);
wire::Bytes encode(const BatteryState& m);
wire::Bytes encode(const BatteryCommand& m);

/// Throws BadMessage on truncated or trailing bytes.
template <class T>
T decode(std::span<const std::uint8_t> bytes);

std::string_view to_string(TouchPhase p);
std::string_view to_string(TouchSource s);

}  // namespace vtui::devices
