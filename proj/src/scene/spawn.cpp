#include "vtui/scene/spawn.hpp"

#include "vtui/devices/topics.hpp"
#include "vtui/error.hpp"
#include "vtui/msgbus/envelope.hpp"
#include "vtui/scene/validate.hpp"

namespace vtui::scene {

physics::BodyId ModelInstance::body(const std::string& link) const {
  auto it = links.find(link);
  if (it == links.end()) throw Error(Errc::NoSuchBody, name + "/" + link);
  return it->second;
}

const ModelInstance* InstanceRegistry::find(const std::string& name) const {
  for (const auto& i : instances_) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

const ModelInstance* InstanceRegistry::owner_of(physics::BodyId body) const {
  for (const auto& i : instances_) {
    for (const auto& [link, id] : i.links) {
      if (id == body) return &i;
    }
  }
  return nullptr;
}

const ModelInstance& spawn(physics::World& world, InstanceRegistry& registry, const ModelSpec& model,
                           const Pose& pose, const std::string& instance_name, msgbus::Bus* bus) {
  if (!msgbus::valid_segment(instance_name)) {
    throw Error(Errc::ValidationFailed, "instance name '" + instance_name + "' must match [a-z0-9_]+");
  }
  if (registry.find(instance_name)) throw Error(Errc::NameCollision, "instance '" + instance_name + "' exists");
  WorldSettings settings;
  settings.dt = world.config().dt;
  if (auto diags = validate_model(model, settings); !diags.empty()) {
    throw Error(Errc::ValidationFailed, format_diagnostics(diags));
  }
  for (const auto& l : model.links) {
    if (world.find_body(instance_name + "/" + l.name)) {
      throw Error(Errc::NameCollision, "body '" + instance_name + "/" + l.name + "' exists");
    }
  }

  ModelInstance inst;
  inst.id = static_cast<std::uint32_t>(registry.instances_.size());
  inst.name = instance_name;
  inst.model = model;
  inst.pose = pose;
  for (const auto& l : model.links) {
    inst.links[l.name] = world.add_body(instance_name + "/" + l.name, l, pose * l.initial_pose);
  }
  for (const auto& j : model.joints) {
    inst.joints.push_back(world.add_joint(j, inst.links.at(j.parent), inst.links.at(j.child)));
  }
  if (bus) {
    for (const auto& d : model.devices) {
      for (const auto& [topic, tag] : devices::device_topics(instance_name, d)) bus->declare(topic, tag);
    }
    for (const auto& d : model.displays) {
      for (const auto& [topic, tag] : devices::display_topics(instance_name, d)) bus->declare(topic, tag);
    }
  }
  registry.instances_.push_back(std::move(inst));
  return registry.instances_.back();
}

void spawn_all(const SceneSpec& spec, physics::World& world, InstanceRegistry& registry, msgbus::Bus* bus) {
  for (const auto& i : spec.instances) {
    const ModelSpec* m = spec.find_model(i.model);
    if (!m) throw Error(Errc::ValidationFailed, "instance '" + i.name + "': unknown model '" + i.model + "'");
    spawn(world, registry, *m, i.pose, i.name, bus);
  }
}

}  // namespace vtui::scene
