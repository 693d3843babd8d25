#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "vtui/msgbus/bus.hpp"
#include "vtui/physics/world.hpp"
#include "vtui/scene/types.hpp"

namespace vtui::scene {

struct ModelInstance {
  std::uint32_t id = 0;
  std::string name;
  ModelSpec model;
  Pose pose;
  std::map<std::string, physics::BodyId> links;
  std::vector<physics::JointId> joints;

  /// Throws NoSuchBody for an unknown link name.
  physics::BodyId body(const std::string& link) const;
};

/// Instances spawned into one world. References stay valid as instances are added.
class InstanceRegistry {
 public:
  const ModelInstance* find(const std::string& name) const;
  const ModelInstance* owner_of(physics::BodyId body) const;
  const std::deque<ModelInstance>& all() const { return instances_; }

 private:
  friend const ModelInstance& spawn(physics::World&, InstanceRegistry&, const ModelSpec&, const Pose&,
                                    const std::string&, msgbus::Bus*);
  std::deque<ModelInstance> instances_;
};

/// Adds the model's bodies at pose∘initial_pose (named `<instance>/<link>`)
/// and its joints. With a bus, the device topics under `/tui/<instance>/` are
/// declared. Throws NameCollision or ValidationFailed.
const ModelInstance& spawn(physics::World& world, InstanceRegistry& registry, const ModelSpec& model,
                           const Pose& pose, const std::string& instance_name, msgbus::Bus* bus = nullptr);

/// Spawns every [instance] of the scene in order.
void spawn_all(const SceneSpec& spec, physics::World& world, InstanceRegistry& registry, msgbus::Bus* bus = nullptr);

}  // namespace vtui::scene
