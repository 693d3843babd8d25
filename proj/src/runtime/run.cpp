#include "vtui/runtime/run.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "vtui/error.hpp"
#include "vtui/runtime/gateway.hpp"
#include "vtui/scene/format.hpp"

namespace vtui::runtime {

void RunConfig::check() const {
  if (duration && !(*duration >= 0.0 && std::isfinite(*duration))) throw Error(Errc::BadConfig, "duration must be >= 0");
  if (!(factor > 0.0) || !std::isfinite(factor)) throw Error(Errc::BadConfig, "realtime factor must be > 0");
  if (dt && !(*dt > 0.0)) throw Error(Errc::BadConfig, "dt must be > 0");
  if (!(snapshot_rate > 0.0)) throw Error(Errc::BadConfig, "snapshot rate must be > 0");
  if (record_out && record_patterns.empty()) throw Error(Errc::BadConfig, "--out needs at least one --record pattern");
}

std::uint32_t decimation_for(double snapshot_rate, double dt) {
  if (snapshot_rate > 1.0 / dt * (1.0 + 1e-9)) {
    throw Error(Errc::BadConfig, "snapshot rate " + std::to_string(snapshot_rate) + " Hz exceeds 1/dt");
  }
  return static_cast<std::uint32_t>(std::max<long long>(1, std::llround(1.0 / (snapshot_rate * dt))));
}

void RunControl::resume() {
  {
    std::lock_guard lock(mutex_);
    paused_ = false;
    budget_ = 0;
  }
  cv_.notify_all();
}

void RunControl::add_steps(std::uint64_t n) {
  {
    std::lock_guard lock(mutex_);
    budget_ += n;
  }
  cv_.notify_all();
}

bool RunControl::take_step() {
  std::lock_guard lock(mutex_);
  if (budget_ == 0) return false;
  --budget_;
  return true;
}

void RunControl::request_stop() {
  stop_ = true;
  cv_.notify_all();
}

void RunControl::notify() { cv_.notify_all(); }

void RunControl::wait(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return stop_.load() || !paused_.load() || budget_ > 0; });
}

Runner::Runner(RunConfig config) : config_(std::move(config)) {
  config_.check();
  scene::SceneSpec spec;
  try {
    spec = scene::load_scene_file(config_.scene_path);
  } catch (const Error& e) {
    if (e.code() == Errc::Io) throw;
    throw Error(Errc::SceneError, e.what());
  }
  SimulationOptions o;
  o.seed = config_.seed;
  o.dt = config_.dt;
  o.parallel = config_.parallel;
  o.bind_virtual = false;
  o.state_decimation = decimation_for(config_.snapshot_rate, config_.dt.value_or(spec.world.dt));
  sim_ = std::make_unique<Simulation>(std::move(spec), o);

  if (config_.replay_path) {
    auto bag = msgbus::read_bag_file(*config_.replay_path);
    // Invert the remap: device topic -> bag topic.
    std::map<std::string, std::string> source_of;
    for (const auto& [from, to] : config_.remap) source_of[to] = from;
    for (const auto& device : sim_->devices().devices()) {
      const std::string topic = sim_->devices().stream_topic(device);
      auto it = source_of.find(topic);
      const std::string source = it == source_of.end() ? topic : it->second;
      if (!bag.topics.count(source)) continue;
      sim_->devices().bind_replay(device, bag, source);
      replayed_.push_back(device);
    }
  }
  sim_->devices().bind_remaining_virtual();
  if (config_.setup) config_.setup(*sim_);
  if (config_.listen) gateway_ = std::make_unique<Gateway>(*sim_, control_, *config_.listen);
}

Runner::~Runner() {
  if (gateway_) gateway_->stop();
}

std::uint16_t Runner::gateway_port() const { return gateway_ ? gateway_->port() : 0; }

RunReport Runner::run() {
  using clock = std::chrono::steady_clock;
  RunReport report;
  report.replayed_devices = replayed_;
  auto& sim = *sim_;
  auto& bus = sim.bus();
  const std::uint64_t messages_before = bus.messages_published();
  const std::uint64_t start_step = sim.step_count();
  const double dt = sim.world().config().dt;
  const std::optional<std::uint64_t> target =
      config_.duration ? std::optional(start_step + sim.steps_for(*config_.duration)) : std::nullopt;

  msgbus::Recorder recorder;
  if (!config_.record_patterns.empty()) recorder = bus.record(config_.record_patterns);
  if (gateway_) gateway_->start();

  const auto wall_start = clock::now();
  auto pace_origin = wall_start;
  std::uint64_t paced_from = start_step;
  try {
    while (!control_.stop_requested()) {
      if (target && sim.step_count() >= *target) break;
      bool manual = false;
      // Boundary first, so a pause lands before the next step.
      sim.apply_commands();
      if (control_.paused()) {
        if (!control_.take_step()) {
          control_.wait(std::chrono::milliseconds(2));
          pace_origin = clock::now();
          paced_from = sim.step_count();
          continue;
        }
        manual = true;
      }
      sim.step();
      if (manual) sim.publish_state();
      if (config_.mode == ClockMode::Realtime && !manual) {
        double ahead = static_cast<double>(sim.step_count() - paced_from) * dt / config_.factor;
        auto deadline = pace_origin + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(ahead));
        auto now = clock::now();
        if (now < deadline) {
          std::this_thread::sleep_until(deadline);
        } else {
          report.max_lag = std::max(report.max_lag, std::chrono::duration<double>(now - deadline).count());
        }
      }
    }
  } catch (const Error& e) {
    if (e.code() != Errc::NumericalDivergence) throw;
    report.last_good_step = sim.step_count();
    report.error = e.what();
  }
  report.wall_time = std::chrono::duration<double>(clock::now() - wall_start).count();
  if (gateway_) gateway_->stop();

  report.steps = sim.step_count() - start_step;
  report.virtual_duration = static_cast<double>(report.steps) * dt;
  report.messages = bus.messages_published() - messages_before;
  if (recorder) {
    auto bag = bus.stop(recorder);
    report.records = bag.records.size();
    if (config_.record_out) {
      msgbus::write_bag_file(bag, *config_.record_out);
      report.bag_path = config_.record_out;
    }
  }
  return report;
}

RunReport run(const RunConfig& config) {
  Runner runner(config);
  return runner.run();
}

RunReport replay_bag(const std::filesystem::path& path, double speed, const msgbus::TopicRemap& remap,
                     const std::vector<std::string>& record_patterns,
                     const std::optional<std::filesystem::path>& out) {
  if (!(speed > 0.0) || !std::isfinite(speed)) throw Error(Errc::BadConfig, "speed must be > 0");
  auto bag = msgbus::read_bag_file(path);
  msgbus::Bus bus;
  auto clock = msgbus::VirtualClock::stepped(bag.start);
  msgbus::Recorder recorder;
  if (!record_patterns.empty()) recorder = bus.record(record_patterns);
  const auto wall_start = std::chrono::steady_clock::now();
  auto stats = msgbus::replay(bus, bag, clock, speed, remap);
  RunReport report;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  report.messages = stats.messages_sent;
  report.virtual_duration = msgbus::nanos_to_seconds(stats.virtual_duration);
  if (recorder) {
    auto rec = bus.stop(recorder);
    report.records = rec.records.size();
    if (out) {
      msgbus::write_bag_file(rec, *out);
      report.bag_path = out;
    }
  }
  return report;
}

}  // namespace vtui::runtime
