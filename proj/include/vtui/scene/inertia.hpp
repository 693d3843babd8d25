#pragma once

#include "vtui/scene/types.hpp"

namespace vtui::scene {

/// Solid-body inertia tensor about the center of mass, in the link frame.
/// Throws ZeroMass for mass <= 0 and for static planes.
Mat3 auto_inertia(const GeometryPrimitive& geometry, double mass);

/// The link's inertia: explicit tensor if given, else auto_inertia.
Mat3 link_inertia(const LinkSpec& link);

}  // namespace vtui::scene
