#pragma once

// Headless and realtime runs of a scene: stepping, recording, replaying a
// bag into the device layer, and the optional WebSocket gateway.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vtui/msgbus/replay.hpp"
#include "vtui/runtime/simulation.hpp"

namespace vtui::runtime {

enum class ClockMode { Stepped, Realtime };

struct RunConfig {
  std::filesystem::path scene_path;
  std::optional<double> duration;  // s of virtual time; nullopt runs until stopped
  ClockMode mode = ClockMode::Stepped;
  double factor = 1.0;  // realtime: virtual seconds per wall second
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  bool parallel = true;
  std::vector<std::string> record_patterns;
  std::optional<std::filesystem::path> record_out;
  /// Devices whose topic (after remap) appears in this bag replay it.
  std::optional<std::filesystem::path> replay_path;
  /// Bag topic -> device topic.
  msgbus::TopicRemap remap;
  double snapshot_rate = 30.0;  // Hz
  std::optional<std::string> listen;  // "host:port"; port 0 picks a free one
  /// Runs after the scene is spawned and bound (example nodes, hooks).
  std::function<void(Simulation&)> setup;

  /// Throws BadConfig for out-of-range values.
  void check() const;
};

struct RunReport {
  std::uint64_t steps = 0;
  double wall_time = 0.0;  // s
  double virtual_duration = 0.0;  // s
  std::uint64_t messages = 0;
  std::optional<std::filesystem::path> bag_path;
  std::uint64_t records = 0;  // in the written bag
  std::vector<std::string> replayed_devices;
  /// Set when the run stopped on NumericalDivergence.
  std::optional<std::uint64_t> last_good_step;
  std::string error;
  /// Realtime mode: largest wall-clock lag behind the schedule, s.
  double max_lag = 0.0;
};

/// Pause / single-step state shared by the run loop and the gateway. Changes
/// are made from commands, so they take effect at step boundaries.
class RunControl {
 public:
  bool paused() const { return paused_.load(); }
  void pause() { paused_ = true; }
  void resume();
  void add_steps(std::uint64_t n);
  /// Consumes one manual step if any are pending.
  bool take_step();
  void request_stop();
  bool stop_requested() const { return stop_.load(); }
  /// Waits up to `timeout` for resume, new steps or stop.
  void wait(std::chrono::milliseconds timeout);
  void notify();

 private:
  std::atomic<bool> paused_{false};
  std::atomic<bool> stop_{false};
  std::mutex mutex_;
  std::condition_variable cv_;
  std::uint64_t budget_ = 0;
};

class Gateway;

/// Owns the simulation for one run. Construct, optionally start the gateway,
/// then call run() (blocking) on any thread.
class Runner {
 public:
  /// Loads and validates the scene (SceneError), binds replayed devices.
  explicit Runner(RunConfig config);
  ~Runner();

  Simulation& sim() { return *sim_; }
  RunControl& control() { return control_; }
  /// Null unless config.listen was set.
  Gateway* gateway() { return gateway_.get(); }
  std::uint16_t gateway_port() const;

  RunReport run();
  void request_stop() { control_.request_stop(); }

 private:
  RunConfig config_;
  std::unique_ptr<Simulation> sim_;
  RunControl control_;
  std::unique_ptr<Gateway> gateway_;
  std::vector<std::string> replayed_;
};

RunReport run(const RunConfig& config);

/// Replays a bag onto a fresh bus with a stepped clock (no scene). With
/// record patterns, the republished traffic is recorded to `out`.
RunReport replay_bag(const std::filesystem::path& bag, double speed, const msgbus::TopicRemap& remap = {},
                     const std::vector<std::string>& record_patterns = {},
                     const std::optional<std::filesystem::path>& out = {});

std::uint32_t decimation_for(double snapshot_rate, double dt);

}  // namespace vtui::runtime
