#pragma once

#include <vector>

#include "vtui/physics/body.hpp"

namespace vtui::physics {

struct Contact {
  BodyId body_a = 0;
  BodyId body_b = 0;
  Vec3 point = Vec3::Zero();
  /// Unit vector pointing from a toward b.
  Vec3 normal = Vec3::UnitZ();
  double penetration = 0.0;
  double applied_normal_impulse = 0.0;
  double applied_friction_impulse = 0.0;
};

/// Appends the contacts between two bodies (any order) to `out`, with
/// body_a < body_b and the normal oriented a→b. Static/static pairs yield none.
void collide(const Body& a, const Body& b, std::vector<Contact>& out);

/// Axis-aligned world bounds; planes are unbounded.
struct Aabb {
  Vec3 lo = Vec3::Constant(-std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(std::numeric_limits<double>::infinity());
  bool overlaps(const Aabb& o) const {
    return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
  }
};

Aabb world_aabb(const Body& b);

}  // namespace vtui::physics
