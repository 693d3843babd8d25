#pragma once

#include <string>
#include <vector>

#include "vtui/scene/types.hpp"

namespace vtui::scene {

struct Diagnostic {
  /// Machine-readable: JOINT_LOOP, RANGE, UNKNOWN_LINK, DUPLICATE_NAME, ...
  std::string code;
  /// Dotted location, e.g. `model.display_cube.joint.hinge`.
  std::string where;
  std::string message;
};

/// Empty iff every structural invariant of the scene holds.
std::vector<Diagnostic> validate(const SceneSpec& spec);
std::vector<Diagnostic> validate_model(const ModelSpec& model, const WorldSettings& world = {});

std::string format_diagnostics(const std::vector<Diagnostic>& diags);

}  // namespace vtui::scene
