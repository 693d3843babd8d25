#pragma once

// The simulation context: owns the world, the bus, the device hub and the
// step-boundary command queue. Everything that mutates the world goes
// through step(); other threads only post() commands.

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vtui/devices/hub.hpp"
#include "vtui/msgbus/bus.hpp"
#include "vtui/msgbus/clock.hpp"
#include "vtui/physics/world.hpp"
#include "vtui/scene/spawn.hpp"
#include "vtui/scene/types.hpp"

namespace vtui::runtime {

using msgbus::Nanos;

/// Node id of the simulation's own publishers and subscriptions.
inline constexpr std::string_view kSimNode = "sim";

struct SimulationOptions {
  std::optional<std::uint64_t> seed;  // overrides the scene's
  std::optional<double> dt;           // overrides the scene's
  bool parallel = true;
  /// Publish /world/state every N steps; 0 disables it.
  std::uint32_t state_decimation = 1;
  /// Bind every device to the simulation after spawning the scene.
  bool bind_virtual = true;
};

/// An application node driven by the simulation after each step.
class Node {
 public:
  virtual ~Node() = default;
  virtual void spin_once(Nanos now) = 0;
};

class Simulation;
using Command = std::function<void(Simulation&)>;

class Simulation {
 public:
  /// Validates and spawns the scene. Throws SceneError on invalid scenes.
  explicit Simulation(scene::SceneSpec spec, SimulationOptions options = {});
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  msgbus::Bus& bus() { return bus_; }
  physics::World& world() { return world_; }
  const physics::World& world() const { return world_; }
  devices::DeviceHub& devices() { return *hub_; }
  const scene::InstanceRegistry& instances() const { return instances_; }
  const scene::SceneSpec& spec() const { return spec_; }
  const msgbus::VirtualClock& clock() const { return clock_; }
  Nanos now() const { return clock_.now(); }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t step_count() const { return world_.step_count(); }
  Nanos dt_nanos() const { return dt_ns_; }

  /// Spawns a model from the scene; call between steps or from a command.
  const scene::ModelInstance& spawn(const std::string& model, const Pose& pose, const std::string& instance_name);

  void add_node(std::shared_ptr<Node> node);
  /// Runs at every step boundary, before the step (actuators).
  void add_boundary_hook(std::function<void(Simulation&)> hook);
  /// Thread-safe; applied in arrival order at the next step boundary.
  void post(Command command);
  std::size_t pending_commands() const;

  /// Applies queued commands without stepping (used while paused).
  void apply_commands();
  /// Publishes /world/state for the current step unless already done.
  void publish_state();
  void set_state_decimation(std::uint32_t every) { options_.state_decimation = every; }
  std::uint32_t state_decimation() const { return options_.state_decimation; }

  /// One boundary + step. Returns the new step count. NumericalDivergence
  /// propagates with the world left at the last good step.
  std::uint64_t step();
  void run_steps(std::uint64_t n);
  void run_for(double seconds);
  std::uint64_t steps_for(double seconds) const;

  /// Wrench commands from /world/cmd/wrench rejected (unknown/static body).
  std::uint64_t rejected_wrenches() const { return rejected_wrenches_; }

 private:
  void apply_boundary();
  void drain_queue();

  scene::SceneSpec spec_;
  SimulationOptions options_;
  std::uint64_t seed_;
  Nanos dt_ns_;
  msgbus::Bus bus_;
  physics::World world_;
  msgbus::VirtualClock clock_;
  scene::InstanceRegistry instances_;
  std::unique_ptr<devices::DeviceHub> hub_;
  msgbus::Publisher state_pub_;
  msgbus::Subscription wrench_sub_;
  std::vector<std::shared_ptr<Node>> nodes_;
  std::vector<std::function<void(Simulation&)>> hooks_;
  mutable std::mutex queue_mutex_;
  std::deque<Command> queue_;
  std::uint64_t rejected_wrenches_ = 0;
  std::optional<std::uint64_t> state_published_for_;
};

physics::WorldConfig world_config(const scene::SceneSpec& spec, const SimulationOptions& options);

}  // namespace vtui::runtime
