#pragma once

#include <Eigen/Geometry>

namespace vtui {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Rigid transform: position in meters, unit quaternion orientation.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& local) const { return position + orientation * local; }
  Vec3 apply_inverse(const Vec3& world) const { return orientation.conjugate() * (world - position); }

  /// this ∘ rhs: rhs is expressed in this frame.
  Pose operator*(const Pose& rhs) const {
    return {apply(rhs.position), (orientation * rhs.orientation).normalized()};
  }

  Pose inverse() const {
    Quat inv = orientation.conjugate();
    return {-(inv * position), inv};
  }

  bool operator==(const Pose& o) const {
    return position == o.position && orientation.coeffs() == o.orientation.coeffs();
  }
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Two unit vectors completing `n` to a right-handed orthonormal basis.
inline void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
  if (std::abs(n.x()) >= 0.57735) {
    t1 = Vec3(n.y(), -n.x(), 0.0).normalized();
  } else {
    t1 = Vec3(0.0, n.z(), -n.y()).normalized();
  }
  t2 = n.cross(t1);
}

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace vtui
