#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vtui/math.hpp"

namespace vtui::scene {

struct Box {
  Vec3 half_extents = Vec3::Constant(0.5);
  bool operator==(const Box&) const = default;
};
struct Sphere {
  double radius = 0.5;
  bool operator==(const Sphere&) const = default;
};
/// Axis along the local z axis.
struct Cylinder {
  double radius = 0.5;
  double half_length = 0.5;
  bool operator==(const Cylinder&) const = default;
};
/// Points x with normal·x = offset; solid below.
struct StaticPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  bool operator==(const StaticPlane&) const = default;
};

using GeometryPrimitive = std::variant<Box, Sphere, Cylinder, StaticPlane>;

struct Rgb8 {
  std::uint8_t r = 180, g = 180, b = 180;
  bool operator==(const Rgb8&) const = default;
};

struct LinkSpec {
  std::string name;
  GeometryPrimitive geometry = Box{};
  double mass = 0.0;  // 0 means static
  std::optional<Mat3> inertia;  // nullopt means derive from geometry
  double friction_mu = 0.5;
  double restitution = 0.0;
  Pose initial_pose;
  Rgb8 color;

  bool is_static() const { return mass == 0.0; }
  bool operator==(const LinkSpec&) const = default;
};

enum class JointType { Fixed, Revolute, Prismatic };

struct JointSpec {
  std::string name;
  JointType type = JointType::Fixed;
  std::string parent;
  std::string child;
  Vec3 axis = Vec3::UnitZ();    // parent frame
  Vec3 anchor = Vec3::Zero();   // parent frame, m
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double max_effort = 0.0;  // 0 means unlimited
  double damping = 0.0;

  bool operator==(const JointSpec&) const = default;
};

enum class DeviceKind { Accelerometer, Contact, Proximity, Display, Touchscreen, Battery };

struct DeviceDescriptor {
  std::string id;
  DeviceKind kind = DeviceKind::Accelerometer;
  std::string link;
  Pose mount;
  double rate_hz = 100.0;
  // accelerometer
  double noise_sigma = 0.0;
  // proximity
  double max_range = 0.1;
  // battery
  double capacity_j = 100.0;
  double cost_j = 0.0;
  double idle_w = 0.0;
  /// Battery device this device draws from; empty for none.
  std::string battery;

  bool operator==(const DeviceDescriptor&) const = default;
};

/// Rectangle in the xy plane of `mount`, facing +z, centered at its origin.
/// Pixel (0,0) is the corner at local (-size_x/2, +size_y/2).
struct DisplaySpec {
  std::string id;
  std::string link;
  Pose mount;
  double size_x = 0.04;
  double size_y = 0.04;
  int width = 64;
  int height = 64;
  bool touch = false;
  std::string battery;

  bool operator==(const DisplaySpec&) const = default;
};

struct ModelSpec {
  std::string name;
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  std::vector<DeviceDescriptor> devices;
  std::vector<DisplaySpec> displays;
  /// Free-form numeric parameters for application nodes (`param.<key>`).
  std::map<std::string, double> params;

  const LinkSpec* find_link(const std::string& link_name) const;
  bool operator==(const ModelSpec&) const = default;
};

struct WorldSettings {
  Vec3 gravity{0.0, 0.0, -9.81};
  double dt = 1e-3;
  std::uint64_t seed = 0;
  int solver_iterations = 10;
  double baumgarte = 0.2;
  double slop = 1e-3;
  bool sleeping = false;

  bool operator==(const WorldSettings&) const = default;
};

struct InstanceSpec {
  std::string name;
  std::string model;
  Pose pose;
  bool operator==(const InstanceSpec&) const = default;
};

struct SceneSpec {
  int format_version = 1;
  WorldSettings world;
  std::vector<ModelSpec> models;
  std::vector<InstanceSpec> instances;

  const ModelSpec* find_model(const std::string& model_name) const;
  std::size_t link_count() const;
  bool operator==(const SceneSpec&) const = default;
};

std::string_view to_string(JointType t);
std::string_view to_string(DeviceKind k);

}  // namespace vtui::scene
