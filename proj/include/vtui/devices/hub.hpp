#pragma once

// The hardware-abstraction layer: one entry per mounted device, each bound
// to exactly one backend that produces its topic. Consumers cannot tell the
// backends apart; names, type tags and rates are the same for all of them.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vtui/devices/messages.hpp"
#include "vtui/devices/sampling.hpp"
#include "vtui/msgbus/bus.hpp"
#include "vtui/physics/world.hpp"
#include "vtui/scene/spawn.hpp"

namespace vtui::devices {

enum class Backend { Unbound, Virtual, Replay, Scripted };

std::string_view to_string(Backend b);

struct ScriptedSample {
  Nanos stamp = 0;
  msgbus::Bytes payload;
};

/// Relative deviation allowed between a replayed stream's rate and the descriptor.
inline constexpr double kRateTolerance = 0.10;

class DeviceHub {
 public:
  /// `node` publishes the virtual streams and owns the display topics.
  DeviceHub(msgbus::Bus& bus, const physics::World& world, std::uint64_t seed, msgbus::NodeId node = "sim");
  ~DeviceHub();
  DeviceHub(const DeviceHub&) = delete;
  DeviceHub& operator=(const DeviceHub&) = delete;

  /// Registers the instance's devices (unbound) and displays.
  void attach(const scene::ModelInstance& instance);

  // Devices are addressed as "<instance>/<device>". Binding errors:
  // NoSuchDevice, AlreadyBound, RateMismatch, TypeTagConflict.
  void bind_virtual(const std::string& device);
  /// Replays the bag's records on `source_topic` (default: the device's own topic).
  void bind_replay(const std::string& device, const msgbus::BagFile& bag, const std::string& source_topic = {});
  void bind_scripted(const std::string& device, std::vector<ScriptedSample> samples);
  void unbind(const std::string& device);
  /// Binds every still-unbound device to the simulation.
  void bind_remaining_virtual();
  Backend backend(const std::string& device) const;

  std::vector<std::string> devices() const;
  std::vector<std::string> displays() const;
  const scene::DeviceDescriptor& descriptor(const std::string& device) const;
  const scene::DisplaySpec& display(const std::string& display) const;
  /// Topic carrying the device's stream (sample or battery channel).
  std::string stream_topic(const std::string& device) const;

  /// Runs after each world step: applies display/battery commands, produces
  /// due samples, drains batteries and derives touches from contacts.
  void on_step(Nanos now);

  /// Throws NoSuchDevice, DimensionMismatch or BatteryDepleted.
  void present(const std::string& display, const DisplayFrame& frame);
  std::optional<DisplayFrame> current_frame(const std::string& display) const;
  /// Maps a world point and publishes the touch. Throws OffSurface.
  TouchEvent touch_at(const std::string& display, const Vec3& world_point, TouchPhase phase, TouchSource source);
  /// Publishes a touch at pixel coordinates. Throws OffSurface when out of range.
  void touch_pixel(const std::string& display, std::uint32_t u, std::uint32_t v, TouchPhase phase,
                   TouchSource source);
  physics::BodyId display_body(const std::string& display) const;

  BatteryState battery_state(const std::string& battery) const;
  void charge(const std::string& battery, double joules);

  /// Display commands rejected since construction (bad size, depleted battery).
  std::uint64_t rejected_commands() const { return rejected_; }

 private:
  struct DeviceEntry;
  struct DisplayEntry;

  DeviceEntry& device_entry(const std::string& device);
  const DeviceEntry& device_entry(const std::string& device) const;
  DisplayEntry& display_entry(const std::string& display);
  const DisplayEntry& display_entry(const std::string& display) const;
  Battery* battery_for(const std::string& instance, const std::string& battery_id);
  void count_message(const std::string& instance, const std::string& battery_id);
  void publish_frame(DisplayEntry& d);
  void derive_touches(DisplayEntry& d);
  Nanos world_now() const;

  msgbus::Bus& bus_;
  const physics::World& world_;
  std::uint64_t seed_;
  msgbus::NodeId node_;
  std::map<std::string, std::unique_ptr<DeviceEntry>> devices_;
  std::map<std::string, std::unique_ptr<DisplayEntry>> displays_;
  std::uint64_t rejected_ = 0;
};

}  // namespace vtui::devices
