#include "vtui/devices/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "vtui/error.hpp"

namespace vtui::devices {

AccelSample sample_accelerometer(const physics::World& world, physics::BodyId host, const scene::DeviceDescriptor& d,
                                 Nanos stamp, std::mt19937_64* noise) {
  const auto& b = world.body(host);
  const Pose& p = b.state.pose;
  Vec3 r = p.orientation * d.mount.position;
  const Vec3& w = b.state.angular_velocity;
  Vec3 a = b.linear_acceleration + b.angular_acceleration.cross(r) + w.cross(w.cross(r));
  Quat device = p.orientation * d.mount.orientation;
  AccelSample s;
  s.stamp = stamp;
  s.proper_acceleration = device.conjugate() * (a - world.config().gravity);
  if (noise && d.noise_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, d.noise_sigma);
    for (int i = 0; i < 3; ++i) s.proper_acceleration[i] += n(*noise);
  }
  return s;
}

ProximitySample sample_proximity(const physics::World& world, physics::BodyId host, const scene::DeviceDescriptor& d,
                                 Nanos stamp) {
  const Pose& p = world.body(host).state.pose;
  Pose mount = p * d.mount;
  ProximitySample s;
  s.stamp = stamp;
  auto hit = world.raycast(mount.position, mount.orientation * Vec3::UnitX(), d.max_range, host);
  if (hit && hit->distance > 0.0 && hit->distance <= d.max_range) s.distance = hit->distance;
  return s;
}

ContactSample sample_contact(const physics::World& world, physics::BodyId host, Nanos stamp) {
  ContactSample s;
  s.stamp = stamp;
  const double dt = world.config().dt;
  for (const auto& c : world.contacts()) {
    if (c.body_a != host && c.body_b != host) continue;
    bool host_is_a = c.body_a == host;
    ContactEvent e;
    e.other_body = host_is_a ? c.body_b : c.body_a;
    e.other_name = world.body(e.other_body).name;
    e.point = c.point;
    // The normal points a→b, so the push on b is along it and on a against it.
    e.normal = host_is_a ? Vec3(-c.normal) : c.normal;
    e.force = c.applied_normal_impulse / dt;
    s.contacts.push_back(std::move(e));
  }
  return s;
}

TouchEvent map_touch(const physics::World& world, physics::BodyId host, const scene::DisplaySpec& display,
                     const Vec3& world_point, TouchPhase phase, TouchSource source) {
  Pose frame = world.body(host).state.pose * display.mount;
  Vec3 local = frame.apply_inverse(world_point);
  if (std::abs(local.z()) > kTouchTolerance) {
    throw Error(Errc::OffSurface, "point is " + std::to_string(local.z()) + " m off display '" + display.id + "'");
  }
  double fx = (local.x() + 0.5 * display.size_x) / display.size_x;
  double fy = (0.5 * display.size_y - local.y()) / display.size_y;
  if (fx < 0.0 || fx > 1.0 || fy < 0.0 || fy > 1.0) {
    throw Error(Errc::OffSurface, "point outside display '" + display.id + "'");
  }
  auto px = [](double f, int n) {
    auto i = static_cast<std::int64_t>(std::floor(f * n));
    return static_cast<std::uint32_t>(std::clamp<std::int64_t>(i, 0, n - 1));
  };
  TouchEvent t;
  t.display_id = display.id;
  t.u = px(fx, display.width);
  t.v = px(fy, display.height);
  t.phase = phase;
  t.source = source;
  return t;
}

Vec3 pixel_center(const physics::World& world, physics::BodyId host, const scene::DisplaySpec& display,
                  std::uint32_t u, std::uint32_t v) {
  if (u >= static_cast<std::uint32_t>(display.width) || v >= static_cast<std::uint32_t>(display.height)) {
    throw Error(Errc::OffSurface, "pixel outside display '" + display.id + "'");
  }
  double x = (u + 0.5) / display.width * display.size_x - 0.5 * display.size_x;
  double y = 0.5 * display.size_y - (v + 0.5) / display.height * display.size_y;
  Pose frame = world.body(host).state.pose * display.mount;
  return frame.apply(Vec3(x, y, 0.0));
}

Battery::Battery(const scene::DeviceDescriptor& d)
    : capacity_j_(d.capacity_j), cost_j_(d.cost_j), idle_w_(d.idle_w), charge_j_(d.capacity_j) {}

BatteryState Battery::tick(double dt, std::uint64_t messages, Nanos stamp) {
  if (!depleted_) {
    charge_j_ -= idle_w_ * dt + cost_j_ * static_cast<double>(messages);
    if (charge_j_ <= 0.0) {
      charge_j_ = 0.0;
      depleted_ = true;
    }
  }
  return state(stamp);
}

void Battery::charge(double joules) {
  if (!(joules > 0.0)) return;
  charge_j_ = std::min(capacity_j_, charge_j_ + joules);
  if (charge_j_ > 0.0) depleted_ = false;
}

BatteryState Battery::state(Nanos stamp) const {
  BatteryState s;
  s.stamp = stamp;
  s.charge_fraction = capacity_j_ > 0.0 ? charge_j_ / capacity_j_ : 0.0;
  s.depleted = depleted_;
  return s;
}

}  // namespace vtui::devices
