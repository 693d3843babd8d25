#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vtui/physics/body.hpp"
#include "vtui/physics/contact.hpp"
#include "vtui/scene/types.hpp"

namespace vtui::physics {

struct WorldConfig {
  Vec3 gravity{0.0, 0.0, -9.81};
  double dt = 1e-3;
  int solver_iterations = 10;
  double baumgarte = 0.2;
  double slop = 1e-3;
  /// Approach speed below which contacts do not bounce, m/s.
  double restitution_threshold = 0.2;
  double max_linear_speed = 100.0;
  double max_angular_speed = 100.0;
  bool sleeping = false;
  double sleep_linear = 1e-3;
  double sleep_angular = 1e-2;
  double sleep_time = 0.5;
  /// Use the OpenMP kernels. Results are bit-identical to the serial ones.
  bool parallel = true;

  static WorldConfig from(const scene::WorldSettings& s);
};

/// External force/torque on one body. Torque from a force applied away from
/// the center of mass is added automatically.
struct WrenchCommand {
  /// One-step impulse sentinel for `duration`.
  static constexpr double kSingleStep = 0.0;

  BodyId body = 0;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  /// Body frame, relative to the center of mass.
  Vec3 application_point = Vec3::Zero();
  double duration = kSingleStep;
};

struct RayHit {
  BodyId body = 0;
  double distance = 0.0;
  Vec3 point = Vec3::Zero();
};

struct Joint {
  JointId id = 0;
  scene::JointSpec spec;
  BodyId parent = 0;
  BodyId child = 0;
  Vec3 anchor_parent = Vec3::Zero();  // parent body frame
  Vec3 anchor_child = Vec3::Zero();   // child body frame
  Vec3 axis_parent = Vec3::UnitZ();   // parent body frame
  Quat rest_relative = Quat::Identity();  // q_parent^-1 * q_child at creation

  /// Revolute: angle about the axis. Prismatic: displacement along it.
  double position(std::span<const Body> bodies) const;
};

class World {
 public:
  explicit World(WorldConfig config = {});

  const WorldConfig& config() const { return config_; }
  WorldConfig& mutable_config() { return config_; }

  BodyId add_body(const std::string& name, const scene::LinkSpec& link, const Pose& world_pose);
  /// Anchors and rest orientation are captured from the current body poses.
  JointId add_joint(const scene::JointSpec& spec, BodyId parent, BodyId child);

  /// Throws NoSuchBody or StaticBody.
  void apply_wrench(const WrenchCommand& cmd);

  /// One fixed step. On NumericalDivergence the world is left as it was
  /// before the call and the error propagates.
  void step();

  /// Contacts for the current poses, ordered by (body_a, body_b).
  std::vector<Contact> detect_contacts() const;
  /// Contacts resolved during the last step, with their applied impulses.
  const std::vector<Contact>& contacts() const { return contacts_; }

  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& direction, double max_range,
                                std::optional<BodyId> exclude = std::nullopt) const;

  std::span<const Body> bodies() const { return bodies_; }
  const Body& body(BodyId id) const;
  std::optional<BodyId> find_body(const std::string& name) const;
  std::span<const Joint> joints() const { return joints_; }

  /// Teleport/velocity override for scripted setups; wakes the body.
  void set_state(BodyId id, const RigidBodyState& state);
  /// Changes a sphere's collision radius and rescales its inertia.
  void set_sphere_radius(BodyId id, double radius);

  std::uint64_t step_count() const { return step_count_; }
  double time() const { return static_cast<double>(step_count_) * config_.dt; }

  using StepObserver = std::function<void(const World&)>;
  void add_step_observer(StepObserver observer) { observers_.push_back(std::move(observer)); }

 private:
  struct PendingWrench {
    WrenchCommand cmd;
    int steps_left;
  };
  struct CachedImpulse {
    Vec3 local_a;
    double normal;
    double t1;
    double t2;
  };

  Body& mutable_body(BodyId id);
  std::vector<std::pair<BodyId, BodyId>> candidate_pairs() const;
  void step_impl();
  void update_sleep();

  WorldConfig config_;
  std::vector<Body> bodies_;
  std::vector<Joint> joints_;
  std::vector<PendingWrench> wrenches_;
  std::vector<Contact> contacts_;
  std::map<std::pair<BodyId, BodyId>, std::vector<CachedImpulse>> warm_start_;
  std::map<std::pair<BodyId, BodyId>, bool> jointed_;
  std::uint64_t step_count_ = 0;
  std::vector<StepObserver> observers_;
};

}  // namespace vtui::physics
