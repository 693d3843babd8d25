#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtui/msgbus/clock.hpp"
#include "vtui/physics/world.hpp"
#include "vtui/wire.hpp"

namespace vtui::physics {

inline constexpr std::string_view kStateTopic = "/world/state";
inline constexpr std::string_view kWrenchTopic = "/world/cmd/wrench";

struct BodySnapshot {
  BodyId id = 0;
  std::string name;
  Pose pose;
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  bool operator==(const BodySnapshot&) const = default;
};

struct WorldState {
  static constexpr std::string_view type_tag = "WorldState";
  std::uint64_t step_count = 0;
  msgbus::Nanos stamp = 0;
  std::vector<BodySnapshot> bodies;
  bool operator==(const WorldState&) const = default;
};

/// Dynamic bodies only; static ones never move.
WorldState snapshot(const World& world, msgbus::Nanos stamp);

wire::Bytes encode(const WorldState& m);
WorldState decode_world_state(std::span<const std::uint8_t> bytes);

inline constexpr std::string_view kWrenchTypeTag = "WrenchCommand";
wire::Bytes encode(const WrenchCommand& m);
WrenchCommand decode_wrench(std::span<const std::uint8_t> bytes);

}  // namespace vtui::physics
