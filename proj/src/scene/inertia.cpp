#include "vtui/scene/inertia.hpp"

#include "vtui/error.hpp"

namespace vtui::scene {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

Mat3 auto_inertia(const GeometryPrimitive& geometry, double mass) {
  if (!(mass > 0.0)) throw Error(Errc::ZeroMass, "inertia requires a positive mass");
  return std::visit(
      overloaded{
          [&](const Box& b) -> Mat3 {
            Vec3 d = 2.0 * b.half_extents;
            Vec3 sq = d.cwiseProduct(d);
            return (mass / 12.0 * Vec3(sq.y() + sq.z(), sq.x() + sq.z(), sq.x() + sq.y())).asDiagonal();
          },
          [&](const Sphere& s) -> Mat3 { return Mat3::Identity() * (0.4 * mass * s.radius * s.radius); },
          [&](const Cylinder& c) -> Mat3 {
            double len = 2.0 * c.half_length;
            double side = mass * (3.0 * c.radius * c.radius + len * len) / 12.0;
            return Vec3(side, side, 0.5 * mass * c.radius * c.radius).asDiagonal();
          },
          [&](const StaticPlane&) -> Mat3 { throw Error(Errc::ZeroMass, "a static plane cannot carry mass"); },
      },
      geometry);
}

Mat3 link_inertia(const LinkSpec& link) {
  if (link.inertia) return *link.inertia;
  return auto_inertia(link.geometry, link.mass);
}

}  // namespace vtui::scene
