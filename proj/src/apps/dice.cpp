#include "vtui/apps/dice.hpp"

#include <algorithm>

#include "vtui/devices/topics.hpp"
#include "vtui/error.hpp"
#include "vtui/wire.hpp"

namespace vtui::apps {

std::string_view to_string(FaceId f) {
  switch (f) {
    case FaceId::PosX: return "+x";
    case FaceId::NegX: return "-x";
    case FaceId::PosY: return "+y";
    case FaceId::NegY: return "-y";
    case FaceId::PosZ: return "+z";
    case FaceId::NegZ: return "-z";
  }
  return "?";
}

Vec3 outward_normal(FaceId f) {
  switch (f) {
    case FaceId::PosX: return Vec3::UnitX();
    case FaceId::NegX: return -Vec3::UnitX();
    case FaceId::PosY: return Vec3::UnitY();
    case FaceId::NegY: return -Vec3::UnitY();
    case FaceId::PosZ: return Vec3::UnitZ();
    case FaceId::NegZ: return -Vec3::UnitZ();
  }
  return Vec3::Zero();
}

int pips(FaceId f) {
  switch (f) {
    case FaceId::PosZ: return 1;
    case FaceId::PosX: return 2;
    case FaceId::PosY: return 3;
    case FaceId::NegY: return 4;
    case FaceId::NegX: return 5;
    case FaceId::NegZ: return 6;
  }
  return 0;
}

std::optional<FaceId> face_from_suffix(std::string_view s) {
  if (s == "px") return FaceId::PosX;
  if (s == "nx") return FaceId::NegX;
  if (s == "py") return FaceId::PosY;
  if (s == "ny") return FaceId::NegY;
  if (s == "pz") return FaceId::PosZ;
  if (s == "nz") return FaceId::NegZ;
  return std::nullopt;
}

bool quasi_static(const Vec3& a) {
  double n = a.norm();
  return n >= kGateMin && n <= kGateMax;
}

std::optional<FaceId> face_up(const Vec3& a) {
  std::array<std::pair<double, FaceId>, 6> dots;
  for (std::size_t i = 0; i < kAllFaces.size(); ++i) dots[i] = {outward_normal(kAllFaces[i]).dot(a), kAllFaces[i]};
  std::sort(dots.begin(), dots.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  if (!(dots[0].first > 0.0)) return std::nullopt;
  if (dots[0].first - dots[1].first < kIndeterminateMargin * dots[0].first) return std::nullopt;
  return dots[0].second;
}

namespace {

// Rows top to bottom, bit 2 is the left column.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kGlyphs{{
    {7, 5, 5, 5, 7},  // 0
    {2, 6, 2, 2, 7},  // 1
    {7, 1, 7, 4, 7},  // 2
    {7, 1, 7, 1, 7},  // 3
    {5, 5, 7, 1, 1},  // 4
    {7, 4, 7, 1, 7},  // 5
    {7, 4, 7, 5, 7},  // 6
    {7, 1, 1, 1, 1},  // 7
    {7, 5, 7, 5, 7},  // 8
    {7, 5, 7, 1, 7},  // 9
}};

}  // namespace

devices::DisplayFrame numeral_frame(int digit, std::uint32_t width, std::uint32_t height, scene::Rgb8 fg,
                                    scene::Rgb8 bg) {
  if (digit < 0 || digit > 9) throw Error(Errc::BadConfig, "digit out of range");
  devices::DisplayFrame f;
  f.width = width;
  f.height = height;
  f.pixels.resize(std::size_t(width) * height * 3);
  // Glyph occupies the middle 3/5 of the width and height; 5x7 cells incl. margin.
  for (std::uint32_t v = 0; v < height; ++v) {
    for (std::uint32_t u = 0; u < width; ++u) {
      int cx = static_cast<int>(u * 5 / width) - 1;
      int cy = static_cast<int>(v * 7 / height) - 1;
      bool on = cx >= 0 && cx < 3 && cy >= 0 && cy < 5 && ((kGlyphs[digit][cy] >> (2 - cx)) & 1);
      const auto& c = on ? fg : bg;
      std::size_t i = (std::size_t(v) * width + u) * 3;
      f.pixels[i] = c.r;
      f.pixels[i + 1] = c.g;
      f.pixels[i + 2] = c.b;
    }
  }
  return f;
}

msgbus::Bytes encode(const DiceFace& f) {
  wire::Writer w;
  w.u8(static_cast<std::uint8_t>(f.face));
  w.u8(static_cast<std::uint8_t>(f.value));
  return w.take();
}

DiceFace decode_dice_face(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != 2 || bytes[0] > 5) throw Error(Errc::BadMessage, "DiceFace");
  return {static_cast<FaceId>(bytes[0]), bytes[1]};
}

DiceNode::DiceNode(msgbus::Bus& bus, std::string instance, std::string accel, std::map<FaceId, std::string> displays,
                   std::uint32_t width, std::uint32_t height)
    : bus_(bus), instance_(std::move(instance)), node_("dice:" + instance_), width_(width), height_(height) {
  accel_ = bus_.subscribe(node_, devices::device_topic(instance_, accel, devices::Channel::Sample),
                          std::string(devices::AccelSample::type_tag), 256);
  for (const auto& [face, id] : displays) {
    frames_[face] = bus_.advertise(node_, devices::device_topic(instance_, id, devices::Channel::Cmd),
                                   std::string(devices::DisplayFrame::type_tag));
  }
  face_pub_ = bus_.advertise(node_, "/app/" + instance_ + "/face", std::string(kDiceFaceTag), {.latched = true});
}

std::shared_ptr<DiceNode> DiceNode::for_instance(runtime::Simulation& sim, const std::string& instance) {
  const auto* inst = sim.instances().find(instance);
  if (!inst) throw Error(Errc::BadConfig, "no instance " + instance);
  std::string accel;
  for (const auto& d : inst->model.devices) {
    if (d.kind == scene::DeviceKind::Accelerometer) accel = d.id;
  }
  if (accel.empty()) throw Error(Errc::BadConfig, instance + " has no accelerometer");
  std::map<FaceId, std::string> displays;
  std::uint32_t w = 0, h = 0;
  for (const auto& d : inst->model.displays) {
    if (d.id.rfind("face_", 0) != 0) continue;
    if (auto f = face_from_suffix(std::string_view(d.id).substr(5))) {
      displays[*f] = d.id;
      w = static_cast<std::uint32_t>(d.width);
      h = static_cast<std::uint32_t>(d.height);
    }
  }
  return std::make_shared<DiceNode>(sim.bus(), instance, accel, displays, w, h);
}

void DiceNode::show(FaceId face, bool up, Nanos now) {
  auto it = frames_.find(face);
  if (it == frames_.end()) return;
  scene::Rgb8 fg = up ? scene::Rgb8{20, 20, 20} : scene::Rgb8{235, 235, 235};
  scene::Rgb8 bg = up ? scene::Rgb8{250, 210, 60} : scene::Rgb8{30, 30, 36};
  bus_.publish_at(it->second, devices::encode(numeral_frame(pips(face), width_, height_, fg, bg)), now);
}

void DiceNode::spin_once(Nanos now) {
  for (const auto& env : accel_.drain()) {
    Vec3 a = devices::decode<devices::AccelSample>(env.payload).proper_acceleration;
    if (!quasi_static(a)) continue;
    auto f = face_up(a);
    if (!f || f == current_) continue;
    if (!current_) {
      for (FaceId g : kAllFaces) show(g, g == *f, now);
    } else {
      show(*current_, false, now);
      show(*f, true, now);
    }
    current_ = f;
    bus_.publish_at(face_pub_, encode(DiceFace{*f, pips(*f)}), now);
  }
}

}  // namespace vtui::apps
