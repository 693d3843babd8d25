#include "vtui/scene/types.hpp"

namespace vtui::scene {

const LinkSpec* ModelSpec::find_link(const std::string& link_name) const {
  for (const auto& l : links) {
    if (l.name == link_name) return &l;
  }
  return nullptr;
}

const ModelSpec* SceneSpec::find_model(const std::string& model_name) const {
  for (const auto& m : models) {
    if (m.name == model_name) return &m;
  }
  return nullptr;
}

std::size_t SceneSpec::link_count() const {
  std::size_t n = 0;
  for (const auto& m : models) n += m.links.size();
  return n;
}

std::string_view to_string(JointType t) {
  switch (t) {
    case JointType::Fixed: return "fixed";
    case JointType::Revolute: return "revolute";
    case JointType::Prismatic: return "prismatic";
  }
  return "?";
}

std::string_view to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::Accelerometer: return "accelerometer";
    case DeviceKind::Contact: return "contact";
    case DeviceKind::Proximity: return "proximity";
    case DeviceKind::Display: return "display";
    case DeviceKind::Touchscreen: return "touchscreen";
    case DeviceKind::Battery: return "battery";
  }
  return "?";
}

}  // namespace vtui::scene
