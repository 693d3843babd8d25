#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "physics_fixtures.hpp"
#include "vtui/error.hpp"
#include "vtui/physics/kernels.hpp"
#include "vtui/physics/world.hpp"

namespace vtui::physics {
namespace {

using namespace vtui::testing;
constexpr double kG = 9.81;

void run(World& w, int steps) {
  for (int i = 0; i < steps; ++i) w.step();
}

TEST(Integration, FreeFallMatchesAnalytic) {
  World w;
  auto id = w.add_body("ball", sphere_link("ball", 0.05, 1.0), at(0, 0, 1));
  run(w, 400);
  double expected = 1.0 - 0.5 * kG * 0.4 * 0.4;
  EXPECT_NEAR(w.body(id).state.pose.position.z(), expected, 0.01 * expected);
  EXPECT_EQ(w.step_count(), 400u);
  EXPECT_DOUBLE_EQ(w.time(), 0.4);
}

TEST(Integration, AngularMomentumConservedForFreeBox) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto id = w.add_body("box", box_link("box", Vec3(0.05, 0.03, 0.02), 0.2), at(0, 0, 0));
  RigidBodyState s = w.body(id).state;
  s.angular_velocity = Vec3(0, 0, 10);
  w.set_state(id, s);
  auto L = [&] {
    const Body& b = w.body(id);
    return Vec3(b.world_inertia() * b.state.angular_velocity);
  };
  Vec3 L0 = L();
  run(w, 1000);
  EXPECT_LT((L() - L0).norm() / L0.norm(), 0.02);
}

TEST(Integration, AngularMomentumConservedOffAxis) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto id = w.add_body("box", box_link("box", Vec3(0.05, 0.03, 0.02), 0.2), at(0, 0, 0));
  RigidBodyState s = w.body(id).state;
  s.angular_velocity = Vec3(0.3, 0.2, 10);
  w.set_state(id, s);
  auto L = [&] {
    const Body& b = w.body(id);
    return Vec3(b.world_inertia() * b.state.angular_velocity);
  };
  Vec3 L0 = L();
  run(w, 1000);
  EXPECT_LT((L() - L0).norm() / L0.norm(), 0.02);
}

TEST(Integration, QuaternionStaysNormalized) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto id = w.add_body("box", box_link("box", Vec3(0.05, 0.03, 0.02), 0.2), at(0, 0, 0));
  RigidBodyState s = w.body(id).state;
  s.angular_velocity = Vec3(3, -7, 20);
  w.set_state(id, s);
  for (int i = 0; i < 500; ++i) {
    w.step();
    ASSERT_NEAR(w.body(id).state.pose.orientation.norm(), 1.0, 1e-9);
  }
}

double bounce_apex(double restitution) {
  World w;
  w.add_body("ground", ground_link(0.5, restitution), Pose{});
  auto id = w.add_body("ball", sphere_link("ball", 0.05, 1.0, 0.5, restitution), at(0, 0, 1.05));
  // Fall until the first contact, then track the highest point after it.
  bool bounced = false;
  double apex = 0.0;
  for (int i = 0; i < 3000; ++i) {
    w.step();
    const auto& b = w.body(id);
    if (!bounced && b.state.linear_velocity.z() > 0.0) bounced = true;
    if (bounced) {
      apex = std::max(apex, b.state.pose.position.z() - 0.05);
      if (b.state.linear_velocity.z() < 0.0) break;
    }
  }
  return apex;
}

TEST(Contacts, RestitutionApex) {
  double apex = bounce_apex(0.5);
  EXPECT_NEAR(apex / 1.0, 0.25, 0.025);
}

// Penetration recovery alone lifts the ball a little; it must stay far below an elastic bounce.
TEST(Contacts, ZeroRestitutionDoesNotBounceHigh) { EXPECT_LT(bounce_apex(0.0), 0.05); }

double pendulum_period(double L, double amplitude) {
  World w;
  auto pivot = w.add_body("pivot", box_link("pivot", Vec3::Constant(0.005), 0.0), at(0, 0, 1));
  auto bob = w.add_body("bob", sphere_link("bob", 0.01, 1.0),
                        at(L * std::sin(amplitude), 0, 1 - L * std::cos(amplitude)));
  scene::JointSpec j;
  j.name = "hinge";
  j.type = scene::JointType::Revolute;
  j.parent = "pivot";
  j.child = "bob";
  j.axis = Vec3::UnitY();
  w.add_joint(j, pivot, bob);
  // Period from successive upward zero crossings of x.
  std::vector<double> crossings;
  double prev = w.body(bob).state.pose.position.x();
  for (int i = 0; i < 6000 && crossings.size() < 4; ++i) {
    w.step();
    double x = w.body(bob).state.pose.position.x();
    if (prev < 0.0 && x >= 0.0) crossings.push_back(w.time() - w.config().dt * x / (x - prev));
    prev = x;
  }
  if (crossings.size() < 2) return 0.0;
  return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

TEST(Joints, PendulumPeriod) {
  double L = 0.5;
  double expected = 2.0 * std::numbers::pi * std::sqrt(L / kG);
  double period = pendulum_period(L, 5.0 * std::numbers::pi / 180.0);
  EXPECT_NEAR(period, expected, 0.03 * expected);
}

TEST(Joints, RevoluteHoldsArmLength) {
  World w;
  auto pivot = w.add_body("pivot", box_link("pivot", Vec3::Constant(0.005), 0.0), at(0, 0, 1));
  auto bob = w.add_body("bob", sphere_link("bob", 0.01, 1.0), at(0.5, 0, 1));
  scene::JointSpec j;
  j.type = scene::JointType::Revolute;
  j.axis = Vec3::UnitY();
  w.add_joint(j, pivot, bob);
  for (int i = 0; i < 2000; ++i) {
    w.step();
    double r = (w.body(bob).state.pose.position - Vec3(0, 0, 1)).norm();
    ASSERT_NEAR(r, 0.5, 2e-3);
    ASSERT_NEAR(w.body(bob).state.pose.position.y(), 0.0, 1e-6);
  }
}

TEST(Joints, PrismaticLimitClamps) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto base = w.add_body("base", box_link("base", Vec3::Constant(0.01), 0.0), at(0, 0, 0));
  auto slider = w.add_body("slider", box_link("slider", Vec3::Constant(0.01), 0.5), at(0, 0, 0));
  scene::JointSpec j;
  j.type = scene::JointType::Prismatic;
  j.axis = Vec3::UnitX();
  j.lower = 0.0;
  j.upper = 0.1;
  w.add_joint(j, base, slider);
  w.apply_wrench({slider, Vec3(2, 0.5, 0), Vec3::Zero(), Vec3::Zero(), 3.0});
  run(w, 3000);
  const auto& s = w.body(slider).state;
  EXPECT_NEAR(s.pose.position.x(), 0.1, 1e-3);
  EXPECT_NEAR(s.pose.position.y(), 0.0, 1e-3);
  EXPECT_NEAR(w.joints()[0].position(w.bodies()), 0.1, 1e-3);
}

TEST(Joints, PrismaticLowerLimit) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto base = w.add_body("base", box_link("base", Vec3::Constant(0.01), 0.0), at(0, 0, 0));
  auto slider = w.add_body("slider", box_link("slider", Vec3::Constant(0.01), 0.5), at(0.05, 0, 0));
  scene::JointSpec j;
  j.type = scene::JointType::Prismatic;
  j.axis = Vec3::UnitX();
  j.anchor = Vec3::Zero();
  j.lower = -0.02;
  j.upper = 0.1;
  w.add_joint(j, base, slider);
  w.apply_wrench({slider, Vec3(-2, 0, 0), Vec3::Zero(), Vec3::Zero(), 3.0});
  run(w, 3000);
  EXPECT_NEAR(w.body(slider).state.pose.position.x(), 0.03, 1e-3);
}

TEST(Joints, RevoluteLimitStopsSwing) {
  World w;
  auto pivot = w.add_body("pivot", box_link("pivot", Vec3::Constant(0.005), 0.0), at(0, 0, 1));
  auto bob = w.add_body("bob", sphere_link("bob", 0.01, 1.0), at(0.5, 0, 1));
  scene::JointSpec j;
  j.type = scene::JointType::Revolute;
  j.axis = Vec3::UnitY();
  j.lower = -0.5;
  j.upper = 0.5;
  j.damping = 0.05;
  w.add_joint(j, pivot, bob);
  run(w, 3000);
  // Gravity pulls the arm down: positive rotation about +y takes +x toward -z.
  EXPECT_NEAR(w.joints()[0].position(w.bodies()), 0.5, 0.01);
}

TEST(Joints, FixedJointHoldsUnderGravity) {
  World w;
  auto base = w.add_body("base", box_link("base", Vec3::Constant(0.02), 0.0), at(0, 0, 1));
  auto arm = w.add_body("arm", box_link("arm", Vec3(0.1, 0.01, 0.01), 0.3), at(0.12, 0, 1));
  scene::JointSpec j;
  j.type = scene::JointType::Fixed;
  j.anchor = Vec3(0.02, 0, 0);
  w.add_joint(j, base, arm);
  run(w, 1000);
  const auto& s = w.body(arm).state;
  EXPECT_LT((s.pose.position - Vec3(0.12, 0, 1)).norm(), 1e-3);
  EXPECT_LT(s.pose.orientation.angularDistance(Quat::Identity()), 0.01);
}

TEST(Joints, FixedJointBetweenDynamicBodiesFallsTogether) {
  World w;
  auto a = w.add_body("a", box_link("a", Vec3::Constant(0.02), 0.3), at(0, 0, 1));
  auto b = w.add_body("b", sphere_link("b", 0.02, 0.1), at(0, 0, 1.05));
  scene::JointSpec j;
  j.type = scene::JointType::Fixed;
  j.anchor = Vec3(0, 0, 0.05);
  w.add_joint(j, a, b);
  w.apply_wrench({a, Vec3::Zero(), Vec3(0, 0, 0.01), Vec3::Zero(), 0.2});
  run(w, 500);
  const auto& pa = w.body(a).state.pose;
  const auto& pb = w.body(b).state.pose;
  EXPECT_LT((pa.apply(Vec3(0, 0, 0.05)) - pb.position).norm(), 1e-3);
  EXPECT_LT(pa.orientation.angularDistance(pb.orientation), 0.01);
}

TEST(Joints, JointDampingSlowsSwing) {
  auto energy_after = [](double damping) {
    World w;
    auto pivot = w.add_body("pivot", box_link("pivot", Vec3::Constant(0.005), 0.0), at(0, 0, 1));
    auto bob = w.add_body("bob", sphere_link("bob", 0.01, 1.0), at(0.5, 0, 1));
    scene::JointSpec j;
    j.type = scene::JointType::Revolute;
    j.axis = Vec3::UnitY();
    j.damping = damping;
    w.add_joint(j, pivot, bob);
    run(w, 2000);
      const auto& s = w.body(bob).state;
    return 0.5 * s.linear_velocity.squaredNorm() + kG * s.pose.position.z();
  };
  double e0 = kG * 1.0;
  EXPECT_NEAR(energy_after(0.0), e0, 0.02 * e0);
  EXPECT_LT(energy_after(0.5), e0 - 0.5);
}

TEST(Wrench, ForceBalancesGravity) {
  World w;
  auto id = w.add_body("c", box_link("c", Vec3::Constant(0.025), 0.1), at(0, 0, 1));
  w.apply_wrench({id, Vec3(0, 0, 0.1 * kG), Vec3::Zero(), Vec3::Zero(), 1.0});
  run(w, 500);
  EXPECT_LT(w.body(id).state.linear_velocity.norm(), 1e-9);
}

TEST(Wrench, TorqueSpinsUpPerEulerLaw) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto id = w.add_body("c", box_link("c", Vec3(0.05, 0.03, 0.02), 0.2), at(0, 0, 0));
  double tau = 0.01, t = 0.5;
  w.apply_wrench({id, Vec3::Zero(), Vec3(0, 0, tau), Vec3::Zero(), t});
  run(w, 500);
  double izz = w.body(id).inertia_body(2, 2);
  EXPECT_NEAR(w.body(id).state.angular_velocity.z(), tau * t / izz, 0.01 * tau * t / izz);
}

TEST(Wrench, OffsetForceInducesTorque) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto id = w.add_body("c", box_link("c", Vec3::Constant(0.1), 1.0), at(0, 0, 0));
  double F = 2.0, r = 0.1;
  w.apply_wrench({id, Vec3(F, 0, 0), Vec3::Zero(), Vec3(0, r, 0), WrenchCommand::kSingleStep});
  w.step();
  const auto& b = w.body(id);
  Vec3 expected_torque(0, 0, -F * r);
  EXPECT_TRUE(b.state.accumulated_torque.isApprox(expected_torque, 1e-12));
  Vec3 dw = b.inv_inertia_body * expected_torque * w.config().dt;
  EXPECT_NEAR(b.state.angular_velocity.z(), dw.z(), 1e-12);
  // One-step impulse expires.
  w.step();
  EXPECT_TRUE(w.body(id).state.accumulated_force.isZero());
}

TEST(Wrench, Errors) {
  World w;
  auto g = w.add_body("ground", ground_link(), Pose{});
  try {
    w.apply_wrench({42, Vec3::UnitX(), Vec3::Zero(), Vec3::Zero(), 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoSuchBody);
  }
  try {
    w.apply_wrench({g, Vec3::UnitX(), Vec3::Zero(), Vec3::Zero(), 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::StaticBody);
  }
}

TEST(Contacts, SphereSpherePenetration) {
  World w;
  w.add_body("a", sphere_link("a", 1.0, 1.0), at(0, 0, 0));
  w.add_body("b", sphere_link("b", 1.0, 1.0), at(1.5, 0, 0));
  auto cs = w.detect_contacts();
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_NEAR(cs[0].penetration, 0.5, 1e-12);
  EXPECT_TRUE(cs[0].normal.isApprox(Vec3::UnitX(), 1e-12));
  EXPECT_EQ(cs[0].body_a, 0u);
  EXPECT_EQ(cs[0].body_b, 1u);
}

TEST(Contacts, SeparatedSpheres) {
  World w;
  w.add_body("a", sphere_link("a", 1.0, 1.0), at(0, 0, 0));
  w.add_body("b", sphere_link("b", 1.0, 1.0), at(2.5, 0, 0));
  EXPECT_TRUE(w.detect_contacts().empty());
}

// Oracle: enumerate the eight box corners and keep those at or below the plane.
std::vector<Vec3> corners_below(const Pose& p, const Vec3& half) {
  std::vector<Vec3> out;
  for (int i = 0; i < 8; ++i) {
    Vec3 c(i & 1 ? half.x() : -half.x(), i & 2 ? half.y() : -half.y(), i & 4 ? half.z() : -half.z());
    Vec3 wc = p.apply(c);
    if (wc.z() <= 1e-12) out.push_back(wc);
  }
  return out;
}

TEST(Contacts, BoxRestingOnPlaneHasFourCorners) {
  World w;
  w.add_body("ground", ground_link(), Pose{});
  Pose p = at(0, 0, 0.5);
  w.add_body("box", box_link("box", Vec3::Constant(0.5), 1.0), p);
  auto cs = w.detect_contacts();
  auto oracle = corners_below(p, Vec3::Constant(0.5));
  ASSERT_EQ(cs.size(), 4u);
  ASSERT_EQ(oracle.size(), 4u);
  for (const auto& c : cs) {
    EXPECT_NEAR(c.penetration, 0.0, 1e-12);
    bool matched = false;
    for (const auto& o : oracle) matched |= (o - c.point).norm() < 1e-12;
    EXPECT_TRUE(matched) << c.point.transpose();
    EXPECT_TRUE(c.normal.isApprox(Vec3::UnitZ(), 1e-12));
  }
}

TEST(Contacts, BoxBoxStackedFaceManifold) {
  World w;
  w.add_body("lower", box_link("lower", Vec3::Constant(0.5), 1.0), at(0, 0, 0));
  w.add_body("upper", box_link("upper", Vec3::Constant(0.25), 1.0), at(0.1, 0, 0.74));
  auto cs = w.detect_contacts();
  ASSERT_EQ(cs.size(), 4u);
  for (const auto& c : cs) {
    EXPECT_NEAR(c.penetration, 0.01, 1e-9);
    EXPECT_TRUE(c.normal.isApprox(Vec3::UnitZ(), 1e-9));
  }
}

TEST(Contacts, BoxBoxSeparatedByRotation) {
  World w;
  w.add_body("a", box_link("a", Vec3::Constant(0.5), 1.0), at(0, 0, 0));
  Pose p = at(1.2, 0, 0);
  p.orientation = axis_angle(std::numbers::pi / 4, Vec3::UnitZ());
  w.add_body("b", box_link("b", Vec3::Constant(0.5), 1.0), p);
  // Rotated diagonal reaches 1.2 - 0.707 = 0.493 < 0.5: overlapping.
  EXPECT_FALSE(w.detect_contacts().empty());
  p.position.x() = 1.25;
  World w2;
  w2.add_body("a", box_link("a", Vec3::Constant(0.5), 1.0), at(0, 0, 0));
  w2.add_body("b", box_link("b", Vec3::Constant(0.5), 1.0), p);
  EXPECT_TRUE(w2.detect_contacts().empty());
}

TEST(Contacts, SphereBoxFaceAndEdge) {
  World w;
  w.add_body("box", box_link("box", Vec3::Constant(0.5), 0.0), at(0, 0, 0));
  w.add_body("ball", sphere_link("ball", 0.2, 1.0), at(0, 0, 0.65));
  auto cs = w.detect_contacts();
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_NEAR(cs[0].penetration, 0.05, 1e-12);
  EXPECT_TRUE(cs[0].normal.isApprox(Vec3::UnitZ(), 1e-12));
  // Contact points sit halfway through the overlap.
  EXPECT_TRUE(cs[0].point.isApprox(Vec3(0, 0, 0.475), 1e-12));
}

TEST(Contacts, OrderedByBodyIds) {
  World w;
  w.add_body("ground", ground_link(), Pose{});
  w.add_body("s1", sphere_link("s1", 0.1, 1.0), at(0, 0, 0.09));
  w.add_body("s2", sphere_link("s2", 0.1, 1.0), at(0.15, 0, 0.09));
  auto cs = w.detect_contacts();
  ASSERT_EQ(cs.size(), 3u);
  for (std::size_t i = 1; i < cs.size(); ++i) {
    EXPECT_LE(std::pair(cs[i - 1].body_a, cs[i - 1].body_b), std::pair(cs[i].body_a, cs[i].body_b));
  }
}

TEST(Contacts, RestingBoxIsStable) {
  World w;
  w.add_body("ground", ground_link(0.5), Pose{});
  auto id = w.add_body("box", box_link("box", Vec3::Constant(0.025), 0.1, 0.5), at(0, 0, 0.025));
  run(w, 5000);
  const auto& p = w.body(id).state.pose.position;
  EXPECT_LT(std::hypot(p.x(), p.y()), 1e-3);
  EXPECT_GT(p.z(), 0.025 - w.config().slop);
}

TEST(Contacts, NormalForceOfRestingBoxEqualsWeight) {
  World w;
  w.add_body("ground", ground_link(0.5), Pose{});
  w.add_body("box", box_link("box", Vec3::Constant(0.025), 0.1, 0.5), at(0, 0, 0.025));
  run(w, 1000);
  double impulse = 0.0;
  for (const auto& c : w.contacts()) impulse += c.applied_normal_impulse;
  EXPECT_NEAR(impulse / w.config().dt, 0.1 * kG, 0.02 * 0.1 * kG);
}

TEST(Contacts, FrictionHoldsOnIncline) {
  // Tilted gravity emulates a 20 degree incline; tan(20°) = 0.364 < μ.
  WorldConfig cfg;
  double a = 20.0 * std::numbers::pi / 180.0;
  cfg.gravity = Vec3(kG * std::sin(a), 0, -kG * std::cos(a));
  World w(cfg);
  w.add_body("ground", ground_link(0.6), Pose{});
  auto id = w.add_body("box", box_link("box", Vec3::Constant(0.025), 0.1, 0.6), at(0, 0, 0.025));
  run(w, 2000);
  EXPECT_LT(std::abs(w.body(id).state.pose.position.x()), 2e-3);

  cfg.gravity = Vec3(kG * std::sin(0.6), 0, -kG * std::cos(0.6));  // tan 0.6 = 0.68 > μ
  World slide(cfg);
  slide.add_body("ground", ground_link(0.6), Pose{});
  auto s = slide.add_body("box", box_link("box", Vec3::Constant(0.025), 0.1, 0.6), at(0, 0, 0.025));
  run(slide, 1000);
  EXPECT_GT(slide.body(s).state.pose.position.x(), 0.05);
}

TEST(Contacts, FrictionWithinCone) {
  World w;
  w.add_body("ground", ground_link(0.3), Pose{});
  auto id = w.add_body("box", box_link("box", Vec3::Constant(0.025), 0.1, 0.3), at(0, 0, 0.025));
  RigidBodyState s = w.body(id).state;
  s.linear_velocity = Vec3(1.0, 0.4, 0);
  w.set_state(id, s);
  for (int i = 0; i < 300; ++i) {
    w.step();
    for (const auto& c : w.contacts()) {
      ASSERT_LE(c.applied_friction_impulse, 0.3 * c.applied_normal_impulse * (1 + 1e-12) + 1e-15);
    }
  }
}

TEST(Contacts, MomentumConservedInFrictionlessCollision) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto a = w.add_body("a", sphere_link("a", 0.05, 1.0, 0.0, 0.5), at(0, 0, 0));
  auto b = w.add_body("b", sphere_link("b", 0.05, 2.0, 0.0, 0.5), at(0.3, 0.02, 0));
  RigidBodyState s = w.body(a).state;
  s.linear_velocity = Vec3(1.0, 0, 0);
  w.set_state(a, s);
  auto momentum = [&] { return Vec3(w.body(a).state.linear_velocity * 1.0 + w.body(b).state.linear_velocity * 2.0); };
  Vec3 p0 = momentum();
  bool touched = false;
  for (int i = 0; i < 600; ++i) {
    w.step();
    touched |= !w.contacts().empty();
  }
  ASSERT_TRUE(touched);
  EXPECT_LT((momentum() - p0).norm() / p0.norm(), 1e-3);
}

TEST(Contacts, NoTunnelingProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> height(0.026, 0.2), speed(0.0, 2.0), angle(0, 2 * std::numbers::pi);
  for (int trial = 0; trial < 20; ++trial) {
    World w;
    w.add_body("ground", ground_link(0.5, 0.3), Pose{});
    auto id = w.add_body("ball", sphere_link("ball", 0.025, 0.05, 0.5, 0.3), at(0, 0, height(rng)));
    RigidBodyState s = w.body(id).state;
    double th = angle(rng);
    double v = speed(rng);
    s.linear_velocity = Vec3(0.3 * v * std::cos(th), 0.3 * v * std::sin(th), -v);
    w.set_state(id, s);
    for (int i = 0; i < 10000; ++i) {
      w.step();
      ASSERT_GT(w.body(id).state.pose.position.z(), 0.0) << "trial " << trial << " step " << i;
    }
  }
}

TEST(Raycast, HitsSphereAlongCenterLine) {
  World w;
  w.add_body("s", sphere_link("s", 1.0, 1.0), at(5, 0, 0));
  auto hit = w.raycast(Vec3::Zero(), Vec3::UnitX(), 10.0);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, 4.0, 1e-12);
  EXPECT_EQ(hit->body, 0u);
  EXPECT_FALSE(w.raycast(Vec3::Zero(), -Vec3::UnitX(), 10.0));
  EXPECT_FALSE(w.raycast(Vec3::Zero(), Vec3::UnitX(), 3.9));
}

TEST(Raycast, ExcludesHostAndTieBreaksById) {
  World w;
  auto host = w.add_body("host", box_link("host", Vec3::Constant(0.5), 1.0), at(0, 0, 0));
  w.add_body("far", sphere_link("far", 0.5, 1.0), at(3, 0, 0));
  auto hit = w.raycast(Vec3::Zero(), Vec3::UnitX(), 10.0, host);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->body, 1u);
  EXPECT_NEAR(hit->distance, 2.5, 1e-12);

  World t;
  t.add_body("a", box_link("a", Vec3(0.5, 1, 1), 1.0), at(2, 0, 0));
  t.add_body("b", box_link("b", Vec3(0.5, 1, 1), 1.0), at(2, 0, 0));
  auto tie = t.raycast(Vec3::Zero(), Vec3::UnitX(), 10.0);
  ASSERT_TRUE(tie);
  EXPECT_EQ(tie->body, 0u);
}

// Oracle: march along the ray in fine steps, then bisect on the inside test.
double march_box(const Pose& p, const Vec3& half, const Vec3& o, const Vec3& d, double max_range) {
  auto inside = [&](double t) {
    Vec3 l = p.apply_inverse(o + t * d);
    return (l.array().abs() <= half.array()).all();
  };
  const double step = 1e-5;
  for (double t = step; t <= max_range; t += step) {
    if (inside(t)) {
      double lo = t - step, hi = t;
      for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (inside(mid) ? hi : lo) = mid;
      }
      return hi;
    }
  }
  return std::numeric_limits<double>::infinity();
}

TEST(Raycast, GrazingBoxEdgeMatchesMarch) {
  Pose p = at(2, 0, 0);
  p.orientation = axis_angle(0.3, Vec3(0.2, 1, 0.5));
  Vec3 half(0.3, 0.2, 0.25);
  World w;
  w.add_body("box", box_link("box", half, 1.0), p);
  // Rays running along the +y/+z edge, offset by a fraction of a millimeter either side.
  Vec3 dl = Vec3(1.0, 0.0004, -0.0003).normalized();
  Vec3 d = p.orientation * dl;
  int hits = 0, misses = 0;
  for (double eps : {-2e-3, -3e-4, 5e-4, 1e-3, 4e-3}) {
    Vec3 o = p.apply(Vec3(-1.0, 0.2 - eps, 0.25 - 0.5 * eps));
    auto hit = w.raycast(o, d, 5.0);
    double oracle = march_box(p, half, o, d, 5.0);
    if (std::isinf(oracle)) {
      EXPECT_FALSE(hit) << eps;
      ++misses;
    } else {
      ++hits;
      ASSERT_TRUE(hit) << eps;
      EXPECT_NEAR(hit->distance, oracle, 1e-6);
    }
  }
  EXPECT_GT(hits, 0);
  EXPECT_GT(misses, 0);
}

TEST(Raycast, PlaneHit) {
  World w;
  w.add_body("ground", ground_link(), Pose{});
  auto hit = w.raycast(Vec3(0, 0, 2), Vec3(0, 0, -1), 5.0);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, 2.0, 1e-12);
}

World busy_world(bool parallel) {
  WorldConfig cfg;
  cfg.parallel = parallel;
  World w(cfg);
  w.add_body("ground", ground_link(0.4, 0.2), Pose{});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  // A loose 10 x 12 grid in three layers, dropped from desk heights.
  for (int i = 0; i < 120; ++i) {
    Pose p = at(-0.5 + 0.1 * (i % 10) + 0.1 * u(rng), -0.12 + 0.06 * ((i / 10) % 4), 0.05 + 0.05 * (i / 40));
    p.orientation = axis_angle(u(rng), Vec3(u(rng), u(rng), 1));
    if (i % 2) {
      w.add_body("b" + std::to_string(i), box_link("b", Vec3(0.02, 0.015, 0.01), 0.1, 0.4, 0.2), p);
    } else {
      w.add_body("s" + std::to_string(i), sphere_link("s", 0.015, 0.05, 0.4, 0.2), p);
    }
  }
  return w;
}

TEST(Kernels, ParallelMatchesSerialBitForBit) {
  World serial = busy_world(false);
  World parallel = busy_world(true);
  for (int i = 0; i < 600; ++i) {
    serial.step();
    parallel.step();
  }
  ASSERT_EQ(serial.bodies().size(), parallel.bodies().size());
  for (std::size_t i = 0; i < serial.bodies().size(); ++i) {
    ASSERT_EQ(serial.bodies()[i].state, parallel.bodies()[i].state) << i;
  }
}

TEST(Determinism, SameInputsSameTrajectory) {
  World a = busy_world(true);
  World b = busy_world(true);
  for (int i = 0; i < 300; ++i) {
    if (i == 50) {
      a.apply_wrench({5, Vec3(0.5, 0, 2), Vec3(0, 0.001, 0), Vec3(0.01, 0, 0), 0.02});
      b.apply_wrench({5, Vec3(0.5, 0, 2), Vec3(0, 0.001, 0), Vec3(0.01, 0, 0), 0.02});
    }
    a.step();
    b.step();
  }
  for (std::size_t i = 0; i < a.bodies().size(); ++i) ASSERT_EQ(a.bodies()[i].state, b.bodies()[i].state);
}

TEST(Divergence, NonFiniteStateRestoresWorld) {
  World w;
  auto ok = w.add_body("ok", sphere_link("ok", 0.05, 1.0), at(0, 0, 1));
  auto bad = w.add_body("bad", sphere_link("bad", 0.05, 1.0), at(1, 0, 1));
  run(w, 10);
  RigidBodyState s = w.body(bad).state;
  s.angular_velocity.x() = std::numeric_limits<double>::quiet_NaN();
  w.set_state(bad, s);
  auto before = w.body(ok).state;
  auto steps = w.step_count();
  try {
    w.step();
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NumericalDivergence);
  }
  EXPECT_EQ(w.body(ok).state, before);
  EXPECT_EQ(w.step_count(), steps);
}

TEST(Divergence, ClampOnceThenThrow) {
  WorldConfig cfg;
  cfg.gravity.setZero();
  World w(cfg);
  auto id = w.add_body("ball", sphere_link("ball", 0.05, 1.0), at(0, 0, 0));
  RigidBodyState s = w.body(id).state;
  s.linear_velocity = Vec3(150, 0, 0);
  w.set_state(id, s);
  w.step();
  EXPECT_NEAR(w.body(id).state.linear_velocity.norm(), 100.0, 1e-9);
  s = w.body(id).state;
  auto snapshot = s;
  s.linear_velocity = Vec3(150, 0, 0);
  w.set_state(id, s);
  // set_state keeps the strike count; the second excess in a row diverges.
  auto before = w.body(id).state;
  EXPECT_THROW(w.step(), Error);
  EXPECT_EQ(w.body(id).state, before);
  (void)snapshot;
}

TEST(Sleeping, RestingBodyFallsAsleepAndWakesOnWrench) {
  WorldConfig cfg;
  cfg.sleeping = true;
  World w(cfg);
  w.add_body("ground", ground_link(), Pose{});
  auto id = w.add_body("box", box_link("box", Vec3::Constant(0.025), 0.1), at(0, 0, 0.025));
  run(w, 2000);
  EXPECT_TRUE(w.body(id).asleep);
  w.apply_wrench({id, Vec3(0, 0, 5), Vec3::Zero(), Vec3::Zero(), 0.05});
  EXPECT_FALSE(w.body(id).asleep);
  run(w, 50);
  EXPECT_GT(w.body(id).state.pose.position.z(), 0.03);
}

TEST(SphereRadius, ResizeUpdatesShapeAndInertia) {
  World w;
  auto id = w.add_body("ball", sphere_link("ball", 0.05, 1.0), at(0, 0, 1));
  w.set_sphere_radius(id, 0.1);
  EXPECT_DOUBLE_EQ(w.body(id).shape.radius, 0.1);
  EXPECT_NEAR(w.body(id).inertia_body(0, 0), 0.4 * 0.01, 1e-15);
  EXPECT_THROW(w.set_sphere_radius(id, -1.0), Error);
}

}  // namespace
}  // namespace vtui::physics
