#include "vtui/runtime/simulation.hpp"

#include <cmath>

#include "vtui/error.hpp"
#include "vtui/physics/messages.hpp"
#include "vtui/scene/validate.hpp"

namespace vtui::runtime {

physics::WorldConfig world_config(const scene::SceneSpec& spec, const SimulationOptions& options) {
  auto cfg = physics::WorldConfig::from(spec.world);
  if (options.dt) cfg.dt = *options.dt;
  cfg.parallel = options.parallel;
  return cfg;
}

namespace {

scene::SceneSpec checked(scene::SceneSpec spec, const SimulationOptions& options) {
  if (options.dt) spec.world.dt = *options.dt;
  if (auto diags = scene::validate(spec); !diags.empty()) {
    throw Error(Errc::SceneError, scene::format_diagnostics(diags));
  }
  return spec;
}

}  // namespace

Simulation::Simulation(scene::SceneSpec spec, SimulationOptions options)
    : spec_(checked(std::move(spec), options)),
      options_(options),
      seed_(options.seed.value_or(spec_.world.seed)),
      dt_ns_(msgbus::seconds_to_nanos(spec_.world.dt)),
      world_(world_config(spec_, options)),
      clock_(msgbus::VirtualClock::stepped()) {
  if (dt_ns_ <= 0) throw Error(Errc::BadConfig, "dt rounds to zero nanoseconds");
  hub_ = std::make_unique<devices::DeviceHub>(bus_, world_, seed_, std::string(kSimNode));
  const std::string node(kSimNode);
  state_pub_ = bus_.advertise(node, std::string(physics::kStateTopic), std::string(physics::WorldState::type_tag));
  wrench_sub_ = bus_.subscribe(node, std::string(physics::kWrenchTopic), std::string(physics::kWrenchTypeTag), 256);
  try {
    for (const auto& i : spec_.instances) {
      const auto& inst = scene::spawn(world_, instances_, *spec_.find_model(i.model), i.pose, i.name, &bus_);
      hub_->attach(inst);
    }
  } catch (const Error& e) {
    throw Error(Errc::SceneError, e.what());
  }
  if (options_.bind_virtual) hub_->bind_remaining_virtual();
}

Simulation::~Simulation() = default;

const scene::ModelInstance& Simulation::spawn(const std::string& model, const Pose& pose,
                                              const std::string& instance_name) {
  const scene::ModelSpec* m = spec_.find_model(model);
  if (!m) throw Error(Errc::ValidationFailed, "unknown model '" + model + "'");
  const auto& inst = scene::spawn(world_, instances_, *m, pose, instance_name, &bus_);
  hub_->attach(inst);
  for (const auto& d : inst.model.devices) hub_->bind_virtual(instance_name + "/" + d.id);
  return inst;
}

void Simulation::add_node(std::shared_ptr<Node> node) { nodes_.push_back(std::move(node)); }

void Simulation::add_boundary_hook(std::function<void(Simulation&)> hook) { hooks_.push_back(std::move(hook)); }

void Simulation::post(Command command) {
  std::lock_guard lock(queue_mutex_);
  queue_.push_back(std::move(command));
}

std::size_t Simulation::pending_commands() const {
  std::lock_guard lock(queue_mutex_);
  return queue_.size();
}

void Simulation::drain_queue() {
  std::deque<Command> batch;
  {
    std::lock_guard lock(queue_mutex_);
    batch.swap(queue_);
  }
  for (auto& c : batch) c(*this);
}

void Simulation::apply_commands() { drain_queue(); }

void Simulation::publish_state() {
  const std::uint64_t n = world_.step_count();
  if (state_published_for_ == n) return;
  state_published_for_ = n;
  bus_.publish_at(state_pub_, physics::encode(physics::snapshot(world_, clock_.now())), clock_.now());
}

void Simulation::apply_boundary() {
  drain_queue();
  for (const auto& env : wrench_sub_.drain()) {
    try {
      world_.apply_wrench(physics::decode_wrench(env.payload));
    } catch (const Error&) {
      ++rejected_wrenches_;
    }
  }
  for (auto& h : hooks_) h(*this);
}

std::uint64_t Simulation::step() {
  apply_boundary();
  world_.step();
  const std::uint64_t n = world_.step_count();
  clock_.advance_to(static_cast<Nanos>(n) * dt_ns_);
  const Nanos now = clock_.now();
  hub_->on_step(now);
  if (options_.state_decimation > 0 && n % options_.state_decimation == 0) publish_state();
  for (auto& node : nodes_) node->spin_once(now);
  return n;
}

void Simulation::run_steps(std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i) step();
}

std::uint64_t Simulation::steps_for(double seconds) const {
  return static_cast<std::uint64_t>(std::llround(seconds / world_.config().dt));
}

void Simulation::run_for(double seconds) { run_steps(steps_for(seconds)); }

}  // namespace vtui::runtime
