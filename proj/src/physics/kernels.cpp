#include "vtui/physics/kernels.hpp"

#ifdef VTUI_HAVE_OPENMP
#include <omp.h>
#endif

namespace vtui::physics::kernels {

namespace {

// Below this the fork/join cost dominates.
constexpr std::ptrdiff_t kMinParallelItems = 64;

inline void integrate_velocity(Body& b, const Vec3& gravity, double dt) {
  b.velocity_at_step_start = b.state.linear_velocity;
  b.angular_velocity_at_step_start = b.state.angular_velocity;
  if (b.is_static()) {
    b.inv_inertia_world.setZero();
    return;
  }
  const Mat3 R = b.state.pose.orientation.toRotationMatrix();
  const Mat3 inertia = R * b.inertia_body * R.transpose();
  b.inv_inertia_world = R * b.inv_inertia_body * R.transpose();
  if (b.asleep) return;
  const Vec3& w = b.state.angular_velocity;
  b.state.linear_velocity += dt * (gravity + b.inv_mass * b.state.accumulated_force);
  b.state.angular_velocity +=
      dt * (b.inv_inertia_world * (b.state.accumulated_torque - w.cross(inertia * w)));
}

inline void integrate_position(Body& b, double dt) {
  if (b.is_static()) return;
  auto& pose = b.state.pose;
  pose.position += dt * b.state.linear_velocity;
  const Vec3& w = b.state.angular_velocity;
  Quat spin = Quat(0.0, w.x(), w.y(), w.z()) * pose.orientation;
  pose.orientation.coeffs() += 0.5 * dt * spin.coeffs();
  pose.orientation.normalize();
}

}  // namespace

void integrate_velocities_serial(std::span<Body> bodies, const Vec3& gravity, double dt) {
  for (auto& b : bodies) integrate_velocity(b, gravity, dt);
}

void integrate_velocities_parallel(std::span<Body> bodies, const Vec3& gravity, double dt) {
  const auto n = static_cast<std::ptrdiff_t>(bodies.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallelItems)
  for (std::ptrdiff_t i = 0; i < n; ++i) integrate_velocity(bodies[i], gravity, dt);
}

std::vector<Contact> narrowphase_serial(std::span<const Body> bodies, std::span<const BodyPair> pairs) {
  std::vector<Contact> out;
  for (const auto& [a, b] : pairs) collide(bodies[a], bodies[b], out);
  return out;
}

std::vector<Contact> narrowphase_parallel(std::span<const Body> bodies, std::span<const BodyPair> pairs) {
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  std::vector<std::vector<Contact>> per_pair(pairs.size());
#pragma omp parallel for schedule(dynamic, 16) if (n >= kMinParallelItems)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    collide(bodies[pairs[i].first], bodies[pairs[i].second], per_pair[i]);
  }
  std::size_t total = 0;
  for (const auto& v : per_pair) total += v.size();
  std::vector<Contact> out;
  out.reserve(total);
  for (auto& v : per_pair) out.insert(out.end(), v.begin(), v.end());
  return out;
}

void integrate_positions_serial(std::span<Body> bodies, double dt) {
  for (auto& b : bodies) integrate_position(b, dt);
}

void integrate_positions_parallel(std::span<Body> bodies, double dt) {
  const auto n = static_cast<std::ptrdiff_t>(bodies.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallelItems)
  for (std::ptrdiff_t i = 0; i < n; ++i) integrate_position(bodies[i], dt);
}

int max_threads() {
#ifdef VTUI_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace vtui::physics::kernels
