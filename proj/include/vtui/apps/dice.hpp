#pragma once

// Display Cube as a die: reads the accelerometer, shows pips as numerals.

#include <array>
#include <map>
#include <optional>
#include <string>

#include "vtui/devices/messages.hpp"
#include "vtui/msgbus/bus.hpp"
#include "vtui/runtime/simulation.hpp"

namespace vtui::apps {

using msgbus::Nanos;

enum class FaceId : std::uint8_t { PosX, NegX, PosY, NegY, PosZ, NegZ };

inline constexpr std::array<FaceId, 6> kAllFaces{FaceId::PosX, FaceId::NegX, FaceId::PosY,
                                                 FaceId::NegY, FaceId::PosZ, FaceId::NegZ};

std::string_view to_string(FaceId f);
Vec3 outward_normal(FaceId f);
/// Die value; opposite faces sum to 7.
int pips(FaceId f);
/// "px" -> PosX etc.; used to match display and sensor ids.
std::optional<FaceId> face_from_suffix(std::string_view suffix);

/// Quasi-static gate on |a|, m/s².
inline constexpr double kGateMin = 8.3;
inline constexpr double kGateMax = 11.3;
/// Relative gap the best face needs over the runner-up.
inline constexpr double kIndeterminateMargin = 0.15;

bool quasi_static(const Vec3& proper_acceleration);

/// Face whose outward normal best matches the reading; nullopt when the top
/// two differ by less than the margin. Direction only; callers apply the gate.
std::optional<FaceId> face_up(const Vec3& proper_acceleration);

/// 3x5 bitmap numeral scaled into a w×h frame.
devices::DisplayFrame numeral_frame(int digit, std::uint32_t width, std::uint32_t height, scene::Rgb8 fg,
                                    scene::Rgb8 bg);

inline constexpr std::string_view kDiceFaceTag = "DiceFace";

struct DiceFace {
  FaceId face = FaceId::PosZ;
  int value = 1;
};
msgbus::Bytes encode(const DiceFace& f);
DiceFace decode_dice_face(std::span<const std::uint8_t> bytes);

/// Subscribes to /tui/<inst>/<accel>/sample; on a settled face change sends
/// frames to the face displays' cmd topics and publishes /app/<inst>/face.
class DiceNode : public runtime::Node {
 public:
  /// `displays` maps faces to display ids with the given resolution.
  DiceNode(msgbus::Bus& bus, std::string instance, std::string accel, std::map<FaceId, std::string> displays,
           std::uint32_t width, std::uint32_t height);

  /// Wires the node to a Display Cube instance (displays named face_<px|nx|...>).
  static std::shared_ptr<DiceNode> for_instance(runtime::Simulation& sim, const std::string& instance);

  void spin_once(Nanos now) override;
  std::optional<FaceId> current() const { return current_; }
  std::string node_id() const { return node_; }

 private:
  void show(FaceId face, bool up, Nanos now);

  msgbus::Bus& bus_;
  std::string instance_;
  std::string node_;
  std::uint32_t width_, height_;
  msgbus::Subscription accel_;
  std::map<FaceId, msgbus::Publisher> frames_;
  msgbus::Publisher face_pub_;
  std::optional<FaceId> current_;
};

}  // namespace vtui::apps
