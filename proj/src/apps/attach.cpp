#include "vtui/apps/attach.hpp"

#include "vtui/apps/dice.hpp"
#include "vtui/apps/marble.hpp"
#include "vtui/apps/neighbors.hpp"

namespace vtui::apps {

std::vector<std::string> attach_example_nodes(runtime::Simulation& sim) {
  std::vector<std::string> out;
  std::vector<std::string> sifteos;
  for (const auto& inst : sim.instances().all()) {
    const auto& m = inst.model;
    bool has_accel = false, has_contact = false, has_faces = false;
    std::string contact_link;
    for (const auto& d : m.devices) {
      has_accel |= d.kind == scene::DeviceKind::Accelerometer;
      if (d.kind == scene::DeviceKind::Contact) {
        has_contact = true;
        contact_link = d.link;
      }
    }
    for (const auto& d : m.displays) has_faces |= d.id.rfind("face_", 0) == 0;
    if (has_accel && has_faces) {
      sim.add_node(DiceNode::for_instance(sim, inst.name));
      out.push_back("dice " + inst.name);
    }
    if (m.params.count("neighbor_threshold")) sifteos.push_back(inst.name);
    if (m.params.count("r0") && has_contact) {
      sim.add_node(MarbleNode::for_instance(sim, inst.name));
      install_marble_actuator(sim, inst.name, contact_link);
      out.push_back("marble " + inst.name);
    }
  }
  if (!sifteos.empty()) {
    sim.add_node(NeighborNode::for_instances(sim, sifteos));
    std::string names;
    for (const auto& s : sifteos) names += " " + s;
    out.push_back("neighbors" + names);
  }
  return out;
}

}  // namespace vtui::apps
