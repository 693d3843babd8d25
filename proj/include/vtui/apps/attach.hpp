#pragma once

#include <string>
#include <vector>

#include "vtui/runtime/simulation.hpp"

namespace vtui::apps {

/// Adds the example node that fits each instance: dice for models with an
/// accelerometer and face_* displays, neighbour detection across models with
/// param.neighbor_threshold, the marble node (plus its radius actuator) for
/// models with param.r0 and a contact device. Returns the node descriptions.
std::vector<std::string> attach_example_nodes(runtime::Simulation& sim);

}  // namespace vtui::apps
