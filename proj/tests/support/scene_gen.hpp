#pragma once

// Random SceneSpec generator for round-trip properties.

#include <random>
#include <string>

#include "vtui/scene/types.hpp"

namespace vtui::testing {

class SceneGen {
 public:
  explicit SceneGen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  std::string name(const std::string& prefix, int i) { return prefix + std::to_string(i); }

  Quat quat() {
    Quat q(real(-1, 1), real(-1, 1), real(-1, 1), real(-1, 1));
    if (q.norm() < 1e-3) return Quat::Identity();
    return q.normalized();
  }

  Pose pose() { return {Vec3(real(-1, 1), real(-1, 1), real(0, 2)), quat()}; }

  scene::GeometryPrimitive geometry(bool allow_plane) {
    switch (integer(0, allow_plane ? 3 : 2)) {
      case 0: return scene::Box{Vec3(real(0.001, 0.5), real(0.001, 0.5), real(0.001, 0.5))};
      case 1: return scene::Sphere{real(0.001, 0.5)};
      case 2: return scene::Cylinder{real(0.001, 0.5), real(0.001, 0.5)};
      default: return scene::StaticPlane{Vec3::UnitZ(), real(-1, 1)};
    }
  }

  scene::LinkSpec link(int i) {
    scene::LinkSpec l;
    l.name = name("link", i);
    l.geometry = geometry(i == 0);
    bool plane = std::holds_alternative<scene::StaticPlane>(l.geometry);
    l.mass = plane || integer(0, 5) == 0 ? 0.0 : real(0.01, 5);
    if (!l.is_static() && coin()) {
      Mat3 a = Mat3::Random();
      Mat3 spd = a * a.transpose() + Mat3::Identity() * 0.01;
      l.inertia = Mat3(0.5 * (spd + spd.transpose()));
    }
    l.friction_mu = real(0, 1.5);
    l.restitution = real(0, 1);
    l.initial_pose = pose();
    l.color = {static_cast<std::uint8_t>(integer(0, 255)), static_cast<std::uint8_t>(integer(0, 255)),
               static_cast<std::uint8_t>(integer(0, 255))};
    return l;
  }

  scene::ModelSpec model(int index) {
    scene::ModelSpec m;
    m.name = name("model", index);
    int n = integer(1, 5);
    for (int i = 0; i < n; ++i) m.links.push_back(link(i));
    // Joints form a forest: each link may attach to an earlier one.
    for (int i = 1; i < n; ++i) {
      if (m.links[i].is_static() || !coin()) continue;
      scene::JointSpec j;
      j.name = name("joint", i);
      j.type = static_cast<scene::JointType>(integer(0, 2));
      j.parent = m.links[integer(0, i - 1)].name;
      j.child = m.links[i].name;
      j.axis = Vec3(real(-1, 1), real(-1, 1), real(-1, 1) + 2.5).normalized();
      j.anchor = Vec3(real(-1, 1), real(-1, 1), real(-1, 1));
      if (coin()) {
        j.lower = real(-1, 0);
        j.upper = real(0, 1);
      }
      j.max_effort = coin() ? real(0, 10) : 0.0;
      j.damping = real(0, 1);
      m.joints.push_back(j);
    }
    static const double kRates[] = {1000, 500, 250, 200, 100, 50, 20, 10, 1};
    int nd = integer(0, 3);
    for (int i = 0; i < nd; ++i) {
      scene::DeviceDescriptor d;
      d.id = name("dev", i);
      d.kind = static_cast<scene::DeviceKind>(std::array{0, 1, 2, 5}[integer(0, 3)]);
      d.link = m.links[integer(0, n - 1)].name;
      d.mount = pose();
      d.rate_hz = kRates[integer(0, 8)];
      d.noise_sigma = real(0, 0.1);
      d.max_range = real(0.01, 1);
      d.capacity_j = real(1, 100);
      d.cost_j = real(0, 0.01);
      d.idle_w = real(0, 1);
      m.devices.push_back(d);
    }
    if (coin()) {
      scene::DisplaySpec d;
      d.id = "screen";
      d.link = m.links[0].name;
      d.mount = pose();
      d.size_x = real(0.01, 0.1);
      d.size_y = real(0.01, 0.1);
      d.width = integer(1, 256);
      d.height = integer(1, 256);
      d.touch = coin();
      m.displays.push_back(d);
    }
    if (coin()) m.params["growth"] = real(0, 1);
    return m;
  }

  scene::SceneSpec scene() {
    scene::SceneSpec s;
    s.world.gravity = Vec3(real(-1, 1), real(-1, 1), real(-12, -8));
    s.world.seed = static_cast<std::uint64_t>(integer(0, 1 << 30));
    s.world.sleeping = coin();
    int nm = integer(1, 3);
    for (int i = 0; i < nm; ++i) s.models.push_back(model(i));
    int ni = integer(0, 4);
    for (int i = 0; i < ni; ++i) {
      s.instances.push_back({name("inst", i), s.models[integer(0, nm - 1)].name, pose()});
    }
    return s;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace vtui::testing
