#include "vtui/physics/messages.hpp"

#include "vtui/error.hpp"

namespace vtui::physics {

namespace {

void put(wire::Writer& w, const Vec3& v) {
  w.f64(v.x());
  w.f64(v.y());
  w.f64(v.z());
}

Vec3 get_vec3(wire::Reader& r) {
  double x = r.f64();
  double y = r.f64();
  double z = r.f64();
  return {x, y, z};
}

}  // namespace

WorldState snapshot(const World& world, msgbus::Nanos stamp) {
  WorldState s;
  s.step_count = world.step_count();
  s.stamp = stamp;
  for (const auto& b : world.bodies()) {
    if (b.is_static()) continue;
    s.bodies.push_back({b.id, b.name, b.state.pose, b.state.linear_velocity, b.state.angular_velocity});
  }
  return s;
}

wire::Bytes encode(const WorldState& m) {
  wire::Writer w;
  w.u64(m.step_count);
  w.i64(m.stamp);
  w.u32(static_cast<std::uint32_t>(m.bodies.size()));
  for (const auto& b : m.bodies) {
    w.u32(b.id);
    w.str(b.name);
    put(w, b.pose.position);
    w.f64(b.pose.orientation.w());
    w.f64(b.pose.orientation.x());
    w.f64(b.pose.orientation.y());
    w.f64(b.pose.orientation.z());
    put(w, b.linear_velocity);
    put(w, b.angular_velocity);
  }
  return w.take();
}

WorldState decode_world_state(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  WorldState m;
  m.step_count = r.u64();
  m.stamp = r.i64();
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    BodySnapshot b;
    b.id = r.u32();
    b.name = r.str();
    b.pose.position = get_vec3(r);
    double qw = r.f64(), qx = r.f64(), qy = r.f64(), qz = r.f64();
    b.pose.orientation = Quat(qw, qx, qy, qz);
    b.linear_velocity = get_vec3(r);
    b.angular_velocity = get_vec3(r);
    m.bodies.push_back(std::move(b));
  }
  if (!r.done()) r.fail("trailing bytes");
  return m;
}

wire::Bytes encode(const WrenchCommand& m) {
  wire::Writer w;
  w.u32(m.body);
  put(w, m.force);
  put(w, m.torque);
  put(w, m.application_point);
  w.f64(m.duration);
  return w.take();
}

WrenchCommand decode_wrench(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  WrenchCommand m;
  m.body = r.u32();
  m.force = get_vec3(r);
  m.torque = get_vec3(r);
  m.application_point = get_vec3(r);
  m.duration = r.f64();
  if (!r.done()) r.fail("trailing bytes");
  return m;
}

}  // namespace vtui::physics
