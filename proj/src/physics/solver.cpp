#include "solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace vtui::physics::detail {

namespace {

struct JointFrame {
  Vec3 ra, rb;  // anchors relative to each center of mass, world frame
  Vec3 d;       // child anchor minus parent anchor
  Vec3 axis;    // joint axis, world frame
};

JointFrame joint_frame(const Joint& j, const Body& a, const Body& b) {
  JointFrame f;
  Vec3 pa = a.state.pose.apply(j.anchor_parent);
  Vec3 pb = b.state.pose.apply(j.anchor_child);
  f.ra = pa - a.state.pose.position;
  f.rb = pb - b.state.pose.position;
  f.d = pb - pa;
  f.axis = a.state.pose.orientation * j.axis_parent;
  return f;
}

Jacobian point_row(const JointFrame& f, const Vec3& dir) { return {-dir, -f.ra.cross(dir), dir, f.rb.cross(dir)}; }

/// Row for a direction fixed in the parent body, measuring d·dir.
Jacobian sliding_row(const JointFrame& f, const Vec3& dir) {
  return {-dir, -(f.ra + f.d).cross(dir), dir, f.rb.cross(dir)};
}

Jacobian angular_row(const Vec3& dir) { return {Vec3::Zero(), -dir, Vec3::Zero(), dir}; }

/// Rotation (as a small-angle vector) taking the child's rest orientation to its actual one.
Vec3 orientation_error(const Joint& j, const Body& a, const Body& b) {
  Quat target = a.state.pose.orientation * j.rest_relative;
  Quat e = b.state.pose.orientation * target.conjugate();
  if (e.w() < 0.0) e.coeffs() = -e.coeffs();
  return 2.0 * e.vec();
}

Jacobian axis_row(const Joint& j, const JointFrame& f) {
  if (j.spec.type == scene::JointType::Prismatic) return sliding_row(f, f.axis);
  return angular_row(f.axis);
}

}  // namespace

double joint_position(const Joint& j, const Body& a, const Body& b) {
  switch (j.spec.type) {
    case scene::JointType::Revolute: {
      Quat r = a.state.pose.orientation.conjugate() * b.state.pose.orientation * j.rest_relative.conjugate();
      double angle = 2.0 * std::atan2(r.vec().dot(j.axis_parent), r.w());
      if (angle > M_PI) angle -= 2.0 * M_PI;
      if (angle <= -M_PI) angle += 2.0 * M_PI;
      return angle;
    }
    case scene::JointType::Prismatic: {
      const auto f = joint_frame(j, a, b);
      return f.d.dot(f.axis);
    }
    case scene::JointType::Fixed:
      break;
  }
  return 0.0;
}

double coupling(const Jacobian& i, const Jacobian& j, const Body& a, const Body& b) {
  return a.inv_mass * i.la.dot(j.la) + i.aa.dot(a.inv_inertia_world * j.aa) + b.inv_mass * i.lb.dot(j.lb) +
         i.ab.dot(b.inv_inertia_world * j.ab);
}

// --- contacts --------------------------------------------------------------

ContactConstraint prepare_contact(Contact& c, Body& a, Body& b, const SolverSettings& s) {
  ContactConstraint cc;
  cc.contact = &c;
  cc.a = &a;
  cc.b = &b;
  Vec3 ra = c.point - a.state.pose.position;
  Vec3 rb = c.point - b.state.pose.position;
  auto row = [&](const Vec3& dir) { return Jacobian{-dir, -ra.cross(dir), dir, rb.cross(dir)}; };
  Vec3 t1, t2;
  tangent_basis(c.normal, t1, t2);
  cc.normal = row(c.normal);
  cc.tangent1 = row(t1);
  cc.tangent2 = row(t2);
  auto inv = [&](const Jacobian& J) {
    double k = coupling(J, J, a, b);
    return k > 0.0 ? 1.0 / k : 0.0;
  };
  cc.normal_mass = inv(cc.normal);
  cc.tangent_mass1 = inv(cc.tangent1);
  cc.tangent_mass2 = inv(cc.tangent2);
  cc.mu = std::min(a.link.friction_mu, b.link.friction_mu);

  double vn = cc.normal.velocity(a, b);
  double restitution = std::max(a.link.restitution, b.link.restitution);
  double bounce = vn < -s.restitution_threshold ? -restitution * vn : 0.0;
  double push = s.baumgarte / s.dt * std::max(c.penetration - s.slop, 0.0);
  cc.bias = std::max(bounce, push);
  return cc;
}

void warm_start(ContactConstraint& cc) {
  cc.normal.apply(cc.normal_impulse, *cc.a, *cc.b);
  cc.tangent1.apply(cc.tangent_impulse1, *cc.a, *cc.b);
  cc.tangent2.apply(cc.tangent_impulse2, *cc.a, *cc.b);
}

void solve_contact(ContactConstraint& cc) {
  Body& a = *cc.a;
  Body& b = *cc.b;

  double vn = cc.normal.velocity(a, b);
  double old = cc.normal_impulse;
  cc.normal_impulse = std::max(old + cc.normal_mass * (cc.bias - vn), 0.0);
  cc.normal.apply(cc.normal_impulse - old, a, b);

  // Friction, projected onto the cone |λt| <= μ λn.
  double old1 = cc.tangent_impulse1, old2 = cc.tangent_impulse2;
  double l1 = old1 - cc.tangent_mass1 * cc.tangent1.velocity(a, b);
  double l2 = old2 - cc.tangent_mass2 * cc.tangent2.velocity(a, b);
  double limit = cc.mu * cc.normal_impulse;
  double mag = std::hypot(l1, l2);
  if (mag > limit) {
    double scale = mag > 0.0 ? limit / mag : 0.0;
    l1 *= scale;
    l2 *= scale;
  }
  cc.tangent_impulse1 = l1;
  cc.tangent_impulse2 = l2;
  cc.tangent1.apply(l1 - old1, a, b);
  cc.tangent2.apply(l2 - old2, a, b);
  assert(std::hypot(l1, l2) <= limit * (1.0 + 1e-12) + 1e-300);
}

void store_impulses(ContactConstraint& cc) {
  cc.contact->applied_normal_impulse = cc.normal_impulse;
  cc.contact->applied_friction_impulse = std::hypot(cc.tangent_impulse1, cc.tangent_impulse2);
}

// --- joints ----------------------------------------------------------------

JointConstraint prepare_joint(Joint& j, Body& a, Body& b, const SolverSettings& s) {
  JointConstraint jc;
  jc.joint = &j;
  jc.a = &a;
  jc.b = &b;
  const auto f = joint_frame(j, a, b);
  const double k = s.baumgarte / s.dt;
  auto add = [&](const Jacobian& J, double error) {
    jc.jac[jc.rows] = J;
    jc.bias[jc.rows] = k * error;
    ++jc.rows;
  };

  using scene::JointType;
  Vec3 t1, t2;
  tangent_basis(f.axis, t1, t2);
  switch (j.spec.type) {
    case JointType::Fixed: {
      Vec3 theta = orientation_error(j, a, b);
      for (int i = 0; i < 3; ++i) add(point_row(f, Vec3::Unit(i)), f.d[i]);
      for (int i = 0; i < 3; ++i) add(angular_row(Vec3::Unit(i)), theta[i]);
      break;
    }
    case JointType::Revolute: {
      Vec3 child_axis = b.state.pose.orientation * (j.rest_relative.conjugate() * j.axis_parent);
      Vec3 misalign = f.axis.cross(child_axis);
      for (int i = 0; i < 3; ++i) add(point_row(f, Vec3::Unit(i)), f.d[i]);
      add(angular_row(t1), misalign.dot(t1));
      add(angular_row(t2), misalign.dot(t2));
      break;
    }
    case JointType::Prismatic: {
      Vec3 theta = orientation_error(j, a, b);
      add(sliding_row(f, t1), f.d.dot(t1));
      add(sliding_row(f, t2), f.d.dot(t2));
      for (int i = 0; i < 3; ++i) add(angular_row(Vec3::Unit(i)), theta[i]);
      break;
    }
  }

  Eigen::MatrixXd K(jc.rows, jc.rows);
  for (int r = 0; r < jc.rows; ++r) {
    for (int c = r; c < jc.rows; ++c) K(r, c) = K(c, r) = coupling(jc.jac[r], jc.jac[c], a, b);
  }
  jc.block.compute(K);

  if (j.spec.type != JointType::Fixed) {
    const double q = joint_position(j, a, b);
    Jacobian J = axis_row(j, f);
    double error = 0.0;
    if (q <= j.spec.lower) {
      jc.limit_active = true;
      error = q - j.spec.lower;
    } else if (q >= j.spec.upper) {
      jc.limit_active = true;
      error = j.spec.upper - q;
      J = {-J.la, -J.aa, -J.lb, -J.ab};
    }
    if (jc.limit_active) {
      double kk = coupling(J, J, a, b);
      jc.limit = J;
      jc.limit_mass = kk > 0.0 ? 1.0 / kk : 0.0;
      jc.limit_bias = k * error;
      jc.limit_max = j.spec.max_effort > 0.0 ? j.spec.max_effort * s.dt : 0.0;
    }
  }
  return jc;
}

void apply_joint_damping(const Joint& j, Body& a, Body& b, double dt) {
  if (j.spec.damping <= 0.0 || j.spec.type == scene::JointType::Fixed) return;
  const auto f = joint_frame(j, a, b);
  Jacobian J = axis_row(j, f);
  double k = coupling(J, J, a, b);
  if (k <= 0.0) return;
  double impulse = -J.velocity(a, b) / (k + 1.0 / (j.spec.damping * dt));
  J.apply(impulse, a, b);
}

void solve_joint(JointConstraint& jc) {
  Body& a = *jc.a;
  Body& b = *jc.b;
  if (jc.rows > 0) {
    Eigen::VectorXd rhs(jc.rows);
    for (int r = 0; r < jc.rows; ++r) rhs[r] = -(jc.jac[r].velocity(a, b) + jc.bias[r]);
    Eigen::VectorXd impulse = jc.block.solve(rhs);
    for (int r = 0; r < jc.rows; ++r) {
      if (std::isfinite(impulse[r])) jc.jac[r].apply(impulse[r], a, b);
    }
  }
  if (jc.limit_active) {
    double old = jc.limit_impulse;
    double next = std::max(old - jc.limit_mass * (jc.limit.velocity(a, b) + jc.limit_bias), 0.0);
    if (jc.limit_max > 0.0) next = std::min(next, jc.limit_max);
    jc.limit_impulse = next;
    jc.limit.apply(next - old, a, b);
  }
}

}  // namespace vtui::physics::detail
