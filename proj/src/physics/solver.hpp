#pragma once

// Sequential-impulse (projected Gauss-Seidel) velocity solver for contacts
// and joints. Internal to the physics library.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vtui/physics/world.hpp"

namespace vtui::physics::detail {

/// One constraint row: Jv = la·va + aa·ωa + lb·vb + ab·ωb.
struct Jacobian {
  Vec3 la = Vec3::Zero();
  Vec3 aa = Vec3::Zero();
  Vec3 lb = Vec3::Zero();
  Vec3 ab = Vec3::Zero();

  double velocity(const Body& a, const Body& b) const {
    return la.dot(a.state.linear_velocity) + aa.dot(a.state.angular_velocity) + lb.dot(b.state.linear_velocity) +
           ab.dot(b.state.angular_velocity);
  }
  void apply(double impulse, Body& a, Body& b) const {
    a.state.linear_velocity += a.inv_mass * impulse * la;
    a.state.angular_velocity += a.inv_inertia_world * (impulse * aa);
    b.state.linear_velocity += b.inv_mass * impulse * lb;
    b.state.angular_velocity += b.inv_inertia_world * (impulse * ab);
  }
};

/// J_i M^-1 J_j^T
double coupling(const Jacobian& i, const Jacobian& j, const Body& a, const Body& b);

struct ContactConstraint {
  Contact* contact = nullptr;
  Body* a = nullptr;
  Body* b = nullptr;
  Jacobian normal, tangent1, tangent2;
  double normal_mass = 0.0;
  double tangent_mass1 = 0.0;
  double tangent_mass2 = 0.0;
  double bias = 0.0;
  double mu = 0.0;
  double normal_impulse = 0.0;
  double tangent_impulse1 = 0.0;
  double tangent_impulse2 = 0.0;
};

struct JointConstraint {
  Joint* joint = nullptr;
  Body* a = nullptr;
  Body* b = nullptr;
  // Bilateral rows, solved as one block.
  int rows = 0;
  std::array<Jacobian, 6> jac;
  Eigen::Matrix<double, 6, 1> bias = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::LDLT<Eigen::MatrixXd> block;
  // Limit row, active only when the joint is at or past a limit.
  bool limit_active = false;
  Jacobian limit;
  double limit_mass = 0.0;
  double limit_bias = 0.0;
  double limit_impulse = 0.0;
  double limit_max = 0.0;  // 0 means uncapped
};

struct SolverSettings {
  double dt = 1e-3;
  int iterations = 10;
  double baumgarte = 0.2;
  double slop = 1e-3;
  double restitution_threshold = 0.2;
};

ContactConstraint prepare_contact(Contact& c, Body& a, Body& b, const SolverSettings& s);
void warm_start(ContactConstraint& cc);
void solve_contact(ContactConstraint& cc);
void store_impulses(ContactConstraint& cc);

double joint_position(const Joint& j, const Body& a, const Body& b);
JointConstraint prepare_joint(Joint& j, Body& a, Body& b, const SolverSettings& s);
/// Implicit joint damping, applied once per step before iterating.
void apply_joint_damping(const Joint& j, Body& a, Body& b, double dt);
void solve_joint(JointConstraint& jc);

}  // namespace vtui::physics::detail
