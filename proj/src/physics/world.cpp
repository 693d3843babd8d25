#include "vtui/physics/world.hpp"

#include <algorithm>
#include <cmath>

#include "solver.hpp"
#include "vtui/error.hpp"
#include "vtui/physics/kernels.hpp"
#include "vtui/scene/inertia.hpp"

namespace vtui::physics {

namespace {

constexpr double kWarmStartMatch = 2e-3;  // m

std::pair<BodyId, BodyId> ordered(BodyId a, BodyId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

WorldConfig WorldConfig::from(const scene::WorldSettings& s) {
  WorldConfig c;
  c.gravity = s.gravity;
  c.dt = s.dt;
  c.solver_iterations = s.solver_iterations;
  c.baumgarte = s.baumgarte;
  c.slop = s.slop;
  c.sleeping = s.sleeping;
  return c;
}

double Joint::position(std::span<const Body> bodies) const {
  return detail::joint_position(*this, bodies[parent], bodies[child]);
}

World::World(WorldConfig config) : config_(std::move(config)) {
  if (!(config_.dt > 0.0)) throw Error(Errc::BadConfig, "dt must be positive");
  if (config_.solver_iterations < 1) throw Error(Errc::BadConfig, "solver_iterations must be >= 1");
}

BodyId World::add_body(const std::string& name, const scene::LinkSpec& link, const Pose& world_pose) {
  Body b;
  b.id = static_cast<BodyId>(bodies_.size());
  b.name = name;
  b.link = link;
  b.shape = CollisionShape::from_geometry(link.geometry);
  b.state.pose = world_pose;
  b.state.pose.orientation.normalize();
  if (!link.is_static()) {
    b.inv_mass = 1.0 / link.mass;
    b.inertia_body = scene::link_inertia(link);
    b.inv_inertia_body = b.inertia_body.inverse();
  }
  bodies_.push_back(std::move(b));
  return bodies_.back().id;
}

JointId World::add_joint(const scene::JointSpec& spec, BodyId parent, BodyId child) {
  const Body& a = body(parent);
  const Body& b = body(child);
  Joint j;
  j.id = static_cast<JointId>(joints_.size());
  j.spec = spec;
  j.parent = parent;
  j.child = child;
  j.anchor_parent = spec.anchor;
  j.anchor_child = b.state.pose.apply_inverse(a.state.pose.apply(spec.anchor));
  j.axis_parent = spec.axis.normalized();
  j.rest_relative = (a.state.pose.orientation.conjugate() * b.state.pose.orientation).normalized();
  joints_.push_back(j);
  jointed_[ordered(parent, child)] = true;
  return j.id;
}

const Body& World::body(BodyId id) const {
  if (id >= bodies_.size()) throw Error(Errc::NoSuchBody, "body " + std::to_string(id));
  return bodies_[id];
}

Body& World::mutable_body(BodyId id) {
  if (id >= bodies_.size()) throw Error(Errc::NoSuchBody, "body " + std::to_string(id));
  return bodies_[id];
}

std::optional<BodyId> World::find_body(const std::string& name) const {
  for (const auto& b : bodies_) {
    if (b.name == name) return b.id;
  }
  return std::nullopt;
}

void World::apply_wrench(const WrenchCommand& cmd) {
  Body& b = mutable_body(cmd.body);
  if (b.is_static()) throw Error(Errc::StaticBody, b.name);
  if (!cmd.force.allFinite() || !cmd.torque.allFinite() || !cmd.application_point.allFinite() ||
      !std::isfinite(cmd.duration) || cmd.duration < 0.0) {
    throw Error(Errc::BadConfig, "wrench must be finite with duration >= 0");
  }
  int steps = std::max(1, static_cast<int>(std::llround(cmd.duration / config_.dt)));
  wrenches_.push_back({cmd, steps});
  b.asleep = false;
  b.still_time = 0.0;
}

void World::set_state(BodyId id, const RigidBodyState& state) {
  Body& b = mutable_body(id);
  b.state = state;
  b.state.pose.orientation.normalize();
  b.asleep = false;
  b.still_time = 0.0;
}

void World::set_sphere_radius(BodyId id, double radius) {
  Body& b = mutable_body(id);
  if (b.shape.kind != CollisionShape::Kind::Sphere) throw Error(Errc::BadConfig, b.name + " is not a sphere");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(Errc::BadConfig, "radius must be positive");
  b.shape.radius = radius;
  b.link.geometry = scene::Sphere{radius};
  b.link.inertia.reset();
  if (!b.is_static()) {
    b.inertia_body = scene::link_inertia(b.link);
    b.inv_inertia_body = b.inertia_body.inverse();
  }
  b.asleep = false;
  b.still_time = 0.0;
}

std::vector<std::pair<BodyId, BodyId>> World::candidate_pairs() const {
  std::vector<Aabb> boxes;
  boxes.reserve(bodies_.size());
  for (const auto& b : bodies_) boxes.push_back(world_aabb(b));
  std::vector<std::pair<BodyId, BodyId>> pairs;
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies_.size(); ++j) {
      const Body& a = bodies_[i];
      const Body& b = bodies_[j];
      if (a.is_static() && b.is_static()) continue;
      if ((a.asleep || a.is_static()) && (b.asleep || b.is_static())) continue;
      if (jointed_.contains({a.id, b.id})) continue;
      if (!boxes[i].overlaps(boxes[j])) continue;
      pairs.emplace_back(a.id, b.id);
    }
  }
  return pairs;
}

std::vector<Contact> World::detect_contacts() const {
  auto pairs = candidate_pairs();
  return kernels::narrowphase_serial(bodies_, pairs);
}

void World::step() {
  auto bodies = bodies_;
  auto wrenches = wrenches_;
  auto contacts = contacts_;
  auto cache = warm_start_;
  try {
    step_impl();
  } catch (const Error& e) {
    if (e.code() == Errc::NumericalDivergence) {
      bodies_ = std::move(bodies);
      wrenches_ = std::move(wrenches);
      contacts_ = std::move(contacts);
      warm_start_ = std::move(cache);
    }
    throw;
  }
  for (auto& obs : observers_) obs(*this);
}

void World::step_impl() {
  const double dt = config_.dt;

  for (auto& b : bodies_) {
    b.state.accumulated_force.setZero();
    b.state.accumulated_torque.setZero();
  }
  for (auto& w : wrenches_) {
    Body& b = bodies_[w.cmd.body];
    Vec3 arm = b.state.pose.orientation * w.cmd.application_point;
    b.state.accumulated_force += w.cmd.force;
    b.state.accumulated_torque += w.cmd.torque + arm.cross(w.cmd.force);
    --w.steps_left;
  }
  std::erase_if(wrenches_, [](const PendingWrench& w) { return w.steps_left <= 0; });

  if (config_.parallel) {
    kernels::integrate_velocities_parallel(bodies_, config_.gravity, dt);
  } else {
    kernels::integrate_velocities_serial(bodies_, config_.gravity, dt);
  }

  auto pairs = candidate_pairs();
  contacts_ = config_.parallel ? kernels::narrowphase_parallel(bodies_, pairs)
                               : kernels::narrowphase_serial(bodies_, pairs);

  // Anything touching an awake dynamic body wakes up.
  auto awake_dynamic = [](const Body& b) { return !b.is_static() && !b.asleep; };
  auto wake = [](Body& b) {
    if (b.asleep) {
      b.asleep = false;
      b.still_time = 0.0;
    }
  };
  for (const auto& c : contacts_) {
    Body& a = bodies_[c.body_a];
    Body& b = bodies_[c.body_b];
    if (awake_dynamic(a)) wake(b);
    if (awake_dynamic(b)) wake(a);
  }
  for (const auto& j : joints_) {
    Body& a = bodies_[j.parent];
    Body& b = bodies_[j.child];
    if (awake_dynamic(a)) wake(b);
    if (awake_dynamic(b)) wake(a);
  }
  for (auto& b : bodies_) {
    if (b.asleep) {
      b.state.linear_velocity.setZero();
      b.state.angular_velocity.setZero();
    }
  }

  detail::SolverSettings settings{dt, config_.solver_iterations, config_.baumgarte, config_.slop,
                                  config_.restitution_threshold};

  std::vector<detail::ContactConstraint> contact_rows;
  contact_rows.reserve(contacts_.size());
  for (auto& c : contacts_) {
    Body& a = bodies_[c.body_a];
    Body& b = bodies_[c.body_b];
    if (a.asleep && b.asleep) continue;
    auto cc = detail::prepare_contact(c, a, b, settings);
    auto it = warm_start_.find({c.body_a, c.body_b});
    if (it != warm_start_.end()) {
      Vec3 local = a.state.pose.apply_inverse(c.point);
      for (const auto& cached : it->second) {
        if ((cached.local_a - local).norm() < kWarmStartMatch) {
          cc.normal_impulse = cached.normal;
          cc.tangent_impulse1 = cached.t1;
          cc.tangent_impulse2 = cached.t2;
          break;
        }
      }
    }
    contact_rows.push_back(cc);
  }

  std::vector<detail::JointConstraint> joint_rows;
  joint_rows.reserve(joints_.size());
  for (auto& j : joints_) {
    Body& a = bodies_[j.parent];
    Body& b = bodies_[j.child];
    if (a.is_static() && b.is_static()) continue;
    detail::apply_joint_damping(j, a, b, dt);
    joint_rows.push_back(detail::prepare_joint(j, a, b, settings));
  }

  for (auto& cc : contact_rows) detail::warm_start(cc);
  for (int it = 0; it < config_.solver_iterations; ++it) {
    for (auto& jc : joint_rows) detail::solve_joint(jc);
    for (auto& cc : contact_rows) detail::solve_contact(cc);
  }

  warm_start_.clear();
  for (auto& cc : contact_rows) {
    detail::store_impulses(cc);
    const Contact& c = *cc.contact;
    warm_start_[{c.body_a, c.body_b}].push_back(
        {cc.a->state.pose.apply_inverse(c.point), cc.normal_impulse, cc.tangent_impulse1, cc.tangent_impulse2});
  }

  for (auto& b : bodies_) {
    if (b.is_static()) continue;
    if (!b.state.finite()) throw Error(Errc::NumericalDivergence, b.name + ": non-finite velocity");
    double v = b.state.linear_velocity.norm();
    double w = b.state.angular_velocity.norm();
    if (v > config_.max_linear_speed || w > config_.max_angular_speed) {
      if (++b.clamp_strikes >= 2) {
        throw Error(Errc::NumericalDivergence, b.name + ": speed limit exceeded on consecutive steps");
      }
      if (v > config_.max_linear_speed) b.state.linear_velocity *= config_.max_linear_speed / v;
      if (w > config_.max_angular_speed) b.state.angular_velocity *= config_.max_angular_speed / w;
    } else {
      b.clamp_strikes = 0;
    }
  }

  if (config_.parallel) {
    kernels::integrate_positions_parallel(bodies_, dt);
  } else {
    kernels::integrate_positions_serial(bodies_, dt);
  }

  for (auto& b : bodies_) {
    if (b.is_static()) continue;
    if (!b.state.finite()) throw Error(Errc::NumericalDivergence, b.name + ": non-finite pose");
    b.linear_acceleration = (b.state.linear_velocity - b.velocity_at_step_start) / dt;
    b.angular_acceleration = (b.state.angular_velocity - b.angular_velocity_at_step_start) / dt;
  }

  if (config_.sleeping) update_sleep();
  ++step_count_;
}

void World::update_sleep() {
  for (auto& b : bodies_) {
    if (b.is_static() || b.asleep) continue;
    bool still = b.state.linear_velocity.norm() < config_.sleep_linear &&
                 b.state.angular_velocity.norm() < config_.sleep_angular;
    b.still_time = still ? b.still_time + config_.dt : 0.0;
    if (b.still_time >= config_.sleep_time) {
      b.asleep = true;
      b.state.linear_velocity.setZero();
      b.state.angular_velocity.setZero();
      b.linear_acceleration.setZero();
      b.angular_acceleration.setZero();
    }
  }
}

}  // namespace vtui::physics
