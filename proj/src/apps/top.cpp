#include "vtui/apps/top.hpp"

#include <cmath>

#include "vtui/error.hpp"
#include "vtui/runtime/simulation.hpp"

namespace vtui::apps {

TopScenarioOptions top_options_from(const scene::SceneSpec& spec, const std::string& instance) {
  TopScenarioOptions o;
  o.instance = instance;
  for (const auto& i : spec.instances) {
    if (i.name != instance) continue;
    const auto& params = spec.find_model(i.model)->params;
    if (auto it = params.find("spin_rate"); it != params.end()) o.spin_rate = it->second;
    if (auto it = params.find("spin_time"); it != params.end()) o.spin_time = it->second;
  }
  return o;
}

namespace {

double tilt_of(const physics::Body& b) {
  Vec3 axis = b.state.pose.orientation * Vec3::UnitZ();
  return std::acos(std::clamp(axis.z(), -1.0, 1.0));
}

}  // namespace

TopReport spinning_top_scenario(const scene::SceneSpec& spec, TopScenarioOptions o) {
  if (!(o.snapshot_interval > 0.0) || !(o.duration > 0.0) || !(o.spin_time > 0.0)) {
    throw Error(Errc::BadConfig, "top scenario needs positive duration, spin_time and snapshot_interval");
  }
  runtime::SimulationOptions so;
  so.parallel = o.parallel;
  so.state_decimation = 0;
  runtime::Simulation sim(spec, so);
  TopReport report;

  report.script.push_back("navigate");
  const auto* inst = sim.instances().find(o.instance);
  if (!inst) throw Error(Errc::BadConfig, "no instance " + o.instance);
  const physics::BodyId handle = inst->body(o.link);
  report.script.push_back("select " + o.instance + "/" + o.link);

  const auto& world = sim.world();
  const Vec3 axis = world.body(handle).state.pose.orientation * Vec3::UnitZ();
  const Vec3 pivot = world.body(handle).state.pose.position;
  double mass = 0.0, inertia = 0.0;
  for (const auto& [link, id] : inst->links) {
    const auto& b = world.body(id);
    Vec3 r = b.state.pose.position - pivot;
    Vec3 perp = r - r.dot(axis) * axis;
    mass += b.mass();
    inertia += axis.dot(b.world_inertia() * axis) + b.mass() * perp.squaredNorm();
  }
  const std::uint64_t impulse_steps = sim.steps_for(o.spin_time);
  const double held = static_cast<double>(impulse_steps) * world.config().dt;

  physics::WrenchCommand lift;
  lift.body = handle;
  lift.force = -o.lift_factor * mass * world.config().gravity;
  lift.duration = held;
  if (o.spin_rate != 0.0) lift.torque = axis * (inertia * o.spin_rate / held);
  sim.post([lift](runtime::Simulation& s) { s.world().apply_wrench(lift); });
  report.script.push_back("lift");
  if (o.spin_rate != 0.0) report.script.push_back("spin " + std::to_string(o.spin_rate) + " rad/s");
  sim.run_steps(impulse_steps);
  report.script.push_back("release");
  {
    const auto& b = world.body(handle);
    report.spin_after_impulse = b.state.angular_velocity.dot(b.state.pose.orientation * Vec3::UnitZ());
  }

  const std::uint64_t every = std::max<std::uint64_t>(1, sim.steps_for(o.snapshot_interval));
  const auto samples = static_cast<std::uint64_t>(std::llround(o.duration / o.snapshot_interval));
  for (std::uint64_t k = 1; k <= samples; ++k) {
    sim.run_steps(every);
    report.series.push_back({static_cast<double>(k * every) * world.config().dt, tilt_of(world.body(handle))});
  }
  report.final_tilt = report.series.empty() ? tilt_of(world.body(handle)) : report.series.back().tilt;
  report.steps = sim.step_count();
  return report;
}

}  // namespace vtui::apps
