#pragma once

// Per-body and per-pair loops of the step. Each kernel exists as a serial
// reference and an OpenMP version; both write disjoint outputs in the same
// order, so their results are bit-identical for any thread count.

#include <span>
#include <utility>
#include <vector>

#include "vtui/physics/body.hpp"
#include "vtui/physics/contact.hpp"

namespace vtui::physics::kernels {

using BodyPair = std::pair<BodyId, BodyId>;

/// Gravity, external wrench and gyroscopic term into velocities, and the
/// world-frame inverse inertia used by the solver.
void integrate_velocities_serial(std::span<Body> bodies, const Vec3& gravity, double dt);
void integrate_velocities_parallel(std::span<Body> bodies, const Vec3& gravity, double dt);

/// Contacts for each pair, concatenated in pair order. Pair ids index `bodies`.
std::vector<Contact> narrowphase_serial(std::span<const Body> bodies, std::span<const BodyPair> pairs);
std::vector<Contact> narrowphase_parallel(std::span<const Body> bodies, std::span<const BodyPair> pairs);

/// Semi-implicit position update: x += v dt, q ← normalize(q + ½ ω̂ q dt).
void integrate_positions_serial(std::span<Body> bodies, double dt);
void integrate_positions_parallel(std::span<Body> bodies, double dt);

/// Threads OpenMP would use (1 without OpenMP).
int max_threads();

}  // namespace vtui::physics::kernels
