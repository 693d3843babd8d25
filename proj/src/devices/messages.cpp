#include "vtui/devices/messages.hpp"

#include "vtui/error.hpp"

namespace vtui::devices {

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

void finish(const wire::Reader& r) {
  if (!r.done()) r.fail("trailing bytes");
}

}  // namespace

double ContactSample::total_force() const {
  double f = 0.0;
  for (const auto& c : contacts) f += c.force;
  return f;
}

DisplayFrame DisplayFrame::filled(std::string id, std::uint32_t w, std::uint32_t h, std::uint8_t r, std::uint8_t g,
                                  std::uint8_t b) {
  DisplayFrame f;
  f.display_id = std::move(id);
  f.width = w;
  f.height = h;
  f.pixels.resize(std::size_t{w} * h * 3);
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    f.pixels[i] = r;
    f.pixels[i + 1] = g;
    f.pixels[i + 2] = b;
  }
  return f;
}

wire::Bytes encode(const AccelSample& m) {
  wire::Writer w;
  w.i64(m.stamp);
  put(w, m.proper_acceleration);
  return w.take();
}

template <>
AccelSample decode<AccelSample>(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  AccelSample m;
  m.stamp = r.i64();
  m.proper_acceleration = get_vec3(r);
  finish(r);
  return m;
}

wire::Bytes encode(const ProximitySample& m) {
  wire::Writer w;
  w.i64(m.stamp);
  w.boolean(m.distance.has_value());
  w.f64(m.distance.value_or(0.0));
  return w.take();
}

template <>
ProximitySample decode<ProximitySample>(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  ProximitySample m;
  m.stamp = r.i64();
  bool in_range = r.boolean();
  double d = r.f64();
  if (in_range) m.distance = d;
  finish(r);
  return m;
}

wire::Bytes encode(const ContactSample& m) {
  wire::Writer w;
  w.i64(m.stamp);
  w.u32(static_cast<std::uint32_t>(m.contacts.size()));
  for (const auto& c : m.contacts) {
    w.u32(c.other_body);
    w.str(c.other_name);
    put(w, c.point);
    put(w, c.normal);
    w.f64(c.force);
  }
  return w.take();
}

template <>
ContactSample decode<ContactSample>(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  ContactSample m;
  m.stamp = r.i64();
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    ContactEvent c;
    c.other_body = r.u32();
    c.other_name = r.str();
    c.point = get_vec3(r);
    c.normal = get_vec3(r);
    c.force = r.f64();
    m.contacts.push_back(std::move(c));
  }
  finish(r);
  return m;
}

wire::Bytes encode(const DisplayFrame& m) {
  wire::Writer w;
  w.str(m.display_id);
  w.u32(m.width);
  w.u32(m.height);
  w.blob(m.pixels);
  return w.take();
}

template <>
DisplayFrame decode<DisplayFrame>(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  DisplayFrame m;
  m.display_id = r.str();
  m.width = r.u32();
  m.height = r.u32();
  m.pixels = r.blob();
  finish(r);
  return m;
}

wire::Bytes encode(const TouchEvent& m) {
  wire::Writer w;
  w.str(m.display_id);
  w.u32(m.u);
  w.u32(m.v);
  w.u8(static_cast<std::uint8_t>(m.phase));
  w.u8(static_cast<std::uint8_t>(m.source));
  return w.take();
}

template <>
TouchEvent decode<TouchEvent>(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  TouchEvent m;
  m.display_id = r.str();
  m.u = r.u32();
  m.v = r.u32();
  auto phase = r.u8();
  auto source = r.u8();
  if (phase > 2 || source > 1) r.fail("bad touch enum");
  m.phase = static_cast<TouchPhase>(phase);
  m.source = static_cast<TouchSource>(source);
  finish(r);
  return m;
}

wire::Bytes encode(const BatteryState& m) {
  wire::Writer w;
  w.i64(m.stamp);
  w.f64(m.charge_fraction);
  w.boolean(m.depleted);
  return w.take();
}

template <>
BatteryState decode<BatteryState>(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  BatteryState m;
  m.stamp = r.i64();
  m.charge_fraction = r.f64();
  m.depleted = r.boolean();
  finish(r);
  return m;
}

wire::Bytes encode(const BatteryCommand& m) {
  wire::Writer w;
  w.f64(m.charge_j);
  return w.take();
}

template <>
BatteryCommand decode<BatteryCommand>(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  BatteryCommand m;
  m.charge_j = r.f64();
  finish(r);
  return m;
}

std::string_view to_string(TouchPhase p) {
  switch (p) {
    case TouchPhase::Down: return "down";
    case TouchPhase::Move: return "move";
    case TouchPhase::Up: return "up";
  }
  return "?";
}

std::string_view to_string(TouchSource s) { return s == TouchSource::Contact ? "contact" : "ui"; }

}  // namespace vtui::devices
