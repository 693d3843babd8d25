#include <cmath>
#include <limits>

#include "vtui/error.hpp"
#include "vtui/physics/world.hpp"

namespace vtui::physics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// First t > 0 where the ray crosses the body's surface, or +inf.
double ray_sphere(const Vec3& o, const Vec3& d, double r) {
  double b = o.dot(d);
  double c = o.squaredNorm() - r * r;
  double disc = b * b - c;
  if (disc < 0.0) return kInf;
  double s = std::sqrt(disc);
  double t0 = -b - s;
  double t1 = -b + s;
  if (t0 > 0.0) return t0;
  if (t1 > 0.0) return t1;
  return kInf;
}

double ray_box(const Vec3& o, const Vec3& d, const Vec3& half) {
  double tmin = -kInf, tmax = kInf;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-300) {
      if (std::abs(o[i]) > half[i]) return kInf;
      continue;
    }
    double a = (-half[i] - o[i]) / d[i];
    double b = (half[i] - o[i]) / d[i];
    if (a > b) std::swap(a, b);
    tmin = std::max(tmin, a);
    tmax = std::min(tmax, b);
  }
  if (tmin > tmax) return kInf;
  if (tmin > 0.0) return tmin;
  if (tmax > 0.0) return tmax;
  return kInf;
}

double ray_plane(const Vec3& o, const Vec3& d, const Vec3& n, double offset) {
  double denom = n.dot(d);
  if (std::abs(denom) < 1e-300) return kInf;
  double t = (offset - n.dot(o)) / denom;
  return t > 0.0 ? t : kInf;
}

}  // namespace

std::optional<RayHit> World::raycast(const Vec3& origin, const Vec3& direction, double max_range,
                                     std::optional<BodyId> exclude) const {
  double len = direction.norm();
  if (!(len > 0.0) || !origin.allFinite() || !direction.allFinite()) {
    throw Error(Errc::BadConfig, "ray direction must be finite and non-zero");
  }
  Vec3 dir = direction / len;
  std::optional<RayHit> best;
  for (const auto& b : bodies_) {
    if (exclude && *exclude == b.id) continue;
    const Pose& p = b.state.pose;
    Vec3 lo = p.apply_inverse(origin);
    Vec3 ld = p.orientation.conjugate() * dir;
    double t = kInf;
    switch (b.shape.kind) {
      case CollisionShape::Kind::Sphere:
        t = ray_sphere(lo, ld, b.shape.radius);
        break;
      case CollisionShape::Kind::Box:
        t = ray_box(lo, ld, b.shape.half);
        break;
      case CollisionShape::Kind::Plane:
        t = ray_plane(lo, ld, b.shape.normal, b.shape.offset);
        break;
    }
    if (t > max_range) continue;
    // Bodies are visited in id order, so a tie keeps the lower id.
    if (!best || t < best->distance) best = RayHit{b.id, t, origin + t * dir};
  }
  return best;
}

}  // namespace vtui::physics
