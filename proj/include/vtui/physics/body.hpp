#pragma once

#include <cstdint>
#include <string>

#include "vtui/math.hpp"
#include "vtui/scene/types.hpp"

namespace vtui::physics {

using BodyId = std::uint32_t;
using JointId = std::uint32_t;

struct RigidBodyState {
  Pose pose;
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  Vec3 accumulated_force = Vec3::Zero();
  Vec3 accumulated_torque = Vec3::Zero();

  bool finite() const {
    return pose.position.allFinite() && pose.orientation.coeffs().allFinite() && linear_velocity.allFinite() &&
           angular_velocity.allFinite();
  }
  bool operator==(const RigidBodyState&) const = default;
};

/// What the contact pipeline sees. Cylinders collide as their bounding box.
struct CollisionShape {
  enum class Kind { Sphere, Box, Plane };
  Kind kind = Kind::Box;
  double radius = 0.0;           // sphere
  Vec3 half = Vec3::Zero();      // box
  Vec3 normal = Vec3::UnitZ();   // plane, link frame
  double offset = 0.0;           // plane

  static CollisionShape from_geometry(const scene::GeometryPrimitive& g);
};

struct Body {
  BodyId id = 0;
  std::string name;
  scene::LinkSpec link;
  CollisionShape shape;

  double inv_mass = 0.0;
  Mat3 inertia_body = Mat3::Zero();
  Mat3 inv_inertia_body = Mat3::Zero();
  RigidBodyState state;

  /// World-frame accelerations over the last step, (v_end - v_begin) / dt.
  Vec3 linear_acceleration = Vec3::Zero();
  Vec3 angular_acceleration = Vec3::Zero();

  // Per-step scratch, refreshed before use.
  Mat3 inv_inertia_world = Mat3::Zero();
  Vec3 velocity_at_step_start = Vec3::Zero();
  Vec3 angular_velocity_at_step_start = Vec3::Zero();

  int clamp_strikes = 0;
  bool asleep = false;
  double still_time = 0.0;

  bool is_static() const { return inv_mass == 0.0; }
  double mass() const { return is_static() ? 0.0 : 1.0 / inv_mass; }

  Mat3 world_inertia() const {
    Mat3 R = state.pose.orientation.toRotationMatrix();
    return R * inertia_body * R.transpose();
  }

  /// Velocity of the body-fixed point currently at `world_point`.
  Vec3 point_velocity(const Vec3& world_point) const {
    return state.linear_velocity + state.angular_velocity.cross(world_point - state.pose.position);
  }
};

}  // namespace vtui::physics
