#pragma once

// Pure device models: each reads the world and returns one sample.

#include <random>

#include "vtui/devices/messages.hpp"
#include "vtui/physics/world.hpp"
#include "vtui/scene/types.hpp"

namespace vtui::devices {

/// Half-thickness of the slab in which a point counts as on a display, m.
inline constexpr double kTouchTolerance = 5e-3;

/// Rᵀ(a_mount − g) + noise, with a_mount including ω̇×r and ω×(ω×r).
/// Pass a generator to add N(0, noise_sigma) per axis.
AccelSample sample_accelerometer(const physics::World& world, physics::BodyId host, const scene::DeviceDescriptor& d,
                                 Nanos stamp, std::mt19937_64* noise = nullptr);

/// Single ray along the mount's +x, ignoring the host body.
ProximitySample sample_proximity(const physics::World& world, physics::BodyId host, const scene::DeviceDescriptor& d,
                                 Nanos stamp);

/// Contacts of the last step that touch the host body.
ContactSample sample_contact(const physics::World& world, physics::BodyId host, Nanos stamp);

/// World point on the display rectangle to pixel (u, v), top-left origin.
/// Throws OffSurface if the point is off the plane or outside the rectangle.
TouchEvent map_touch(const physics::World& world, physics::BodyId host, const scene::DisplaySpec& display,
                     const Vec3& world_point, TouchPhase phase = TouchPhase::Down,
                     TouchSource source = TouchSource::Ui);

/// World position of the center of pixel (u, v).
Vec3 pixel_center(const physics::World& world, physics::BodyId host, const scene::DisplaySpec& display,
                  std::uint32_t u, std::uint32_t v);

/// Linear battery: idle draw plus a fixed cost per published message.
class Battery {
 public:
  explicit Battery(const scene::DeviceDescriptor& d);

  /// Drains for dt seconds and `messages` publishes; returns the state at `stamp`.
  BatteryState tick(double dt, std::uint64_t messages, Nanos stamp);
  /// Adds up to capacity; a positive charge clears depletion.
  void charge(double joules);

  double charge_j() const { return charge_j_; }
  double capacity_j() const { return capacity_j_; }
  bool depleted() const { return depleted_; }
  BatteryState state(Nanos stamp) const;

 private:
  double capacity_j_;
  double cost_j_;
  double idle_w_;
  double charge_j_;
  bool depleted_ = false;
};

}  // namespace vtui::devices
