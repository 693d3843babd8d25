#pragma once

// WebSocket gateway, JSON protocol v1 (docs/wire-protocol.md). Runs its own
// io thread; reads the world only through bus topics and changes it only
// through Simulation::post().

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "vtui/physics/messages.hpp"
#include "vtui/devices/messages.hpp"

namespace vtui::runtime {

class Simulation;
class RunControl;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = std::size_t{1} << 20;
/// Per-connection outbound limit; beyond it the oldest state_update goes.
inline constexpr std::size_t kSendQueueLimit = 64;

class Gateway {
 public:
  /// Binds `listen` ("host:port", port 0 for any) right away. Throws BadConfig.
  Gateway(Simulation& sim, RunControl& control, const std::string& listen);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void start();
  void stop();
  std::uint16_t port() const;
  /// Open connections (approximate; read from another thread).
  std::size_t connections() const;
  /// state_update messages dropped from full send queues, all connections.
  std::uint64_t dropped_updates() const;

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

/// Message builders, also used by tests. Call scene_graph_json on the
/// simulation thread.
nlohmann::json hello_json(const Simulation& sim);
nlohmann::json scene_graph_json(const Simulation& sim);
nlohmann::json state_update_json(const physics::WorldState& state);
nlohmann::json display_frame_json(const std::string& instance, const devices::DisplayFrame& frame);

}  // namespace vtui::runtime
