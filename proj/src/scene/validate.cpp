#include "vtui/scene/validate.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "vtui/msgbus/envelope.hpp"

namespace vtui::scene {

namespace {

constexpr double kUnitTol = 1e-9;

class Checker {
 public:
  explicit Checker(std::vector<Diagnostic>& out) : out_(out) {}

  void add(std::string code, std::string where, std::string message) {
    out_.push_back({std::move(code), std::move(where), std::move(message)});
  }

  void name(const std::string& n, const std::string& where) {
    if (!msgbus::valid_segment(n)) add("BAD_NAME", where, "'" + n + "' must match [a-z0-9_]+");
  }

  void unit_quat(const Quat& q, const std::string& where) {
    if (!q.coeffs().allFinite() || std::abs(q.norm() - 1.0) > kUnitTol) {
      add("NOT_UNIT", where, "orientation quaternion is not unit length");
    }
  }

  void pose(const Pose& p, const std::string& where) {
    if (!p.position.allFinite()) add("RANGE", where, "position is not finite");
    unit_quat(p.orientation, where);
  }

  void positive(double v, const std::string& what, const std::string& where) {
    if (!(v > 0.0) || !std::isfinite(v)) add("RANGE", where, what + " must be > 0");
  }

 private:
  std::vector<Diagnostic>& out_;
};

void check_geometry(Checker& c, const GeometryPrimitive& g, const std::string& where) {
  if (auto* b = std::get_if<Box>(&g)) {
    for (int i = 0; i < 3; ++i) c.positive(b->half_extents[i], "box half extent", where);
  } else if (auto* s = std::get_if<Sphere>(&g)) {
    c.positive(s->radius, "sphere radius", where);
  } else if (auto* cy = std::get_if<Cylinder>(&g)) {
    c.positive(cy->radius, "cylinder radius", where);
    c.positive(cy->half_length, "cylinder half length", where);
  } else {
    const auto& p = std::get<StaticPlane>(g);
    if (!p.normal.allFinite() || std::abs(p.normal.norm() - 1.0) > kUnitTol) {
      c.add("NOT_UNIT", where, "plane normal is not unit length");
    }
  }
}

void check_inertia(Checker& c, const Mat3& I, const std::string& where) {
  if (!I.allFinite() || (I - I.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    c.add("INERTIA", where, "inertia tensor is not symmetric");
    return;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(I);
  if (es.eigenvalues().minCoeff() <= 0.0) c.add("INERTIA", where, "inertia tensor is not positive-definite");
}

}  // namespace

std::vector<Diagnostic> validate_model(const ModelSpec& m, const WorldSettings& world) {
  std::vector<Diagnostic> out;
  Checker c(out);
  const std::string base = "model." + m.name;
  c.name(m.name, base);

  std::set<std::string> link_names;
  std::map<std::string, const LinkSpec*> links;
  for (const auto& l : m.links) {
    const auto where = base + ".link." + l.name;
    c.name(l.name, where);
    if (!link_names.insert(l.name).second) c.add("DUPLICATE_NAME", where, "duplicate link name");
    links[l.name] = &l;
    check_geometry(c, l.geometry, where);
    if (!(l.mass >= 0.0) || !std::isfinite(l.mass)) c.add("RANGE", where, "mass must be >= 0");
    if (std::holds_alternative<StaticPlane>(l.geometry) && l.mass != 0.0) {
      c.add("RANGE", where, "planes are static and must have mass 0");
    }
    if (l.mass > 0.0 && l.inertia) check_inertia(c, *l.inertia, where);
    if (!(l.friction_mu >= 0.0) || !std::isfinite(l.friction_mu)) c.add("RANGE", where, "friction must be >= 0");
    if (!(l.restitution >= 0.0 && l.restitution <= 1.0)) c.add("RANGE", where, "restitution must be in [0, 1]");
    c.pose(l.initial_pose, where);
  }

  // Joint graph: each child has one parent, no cycles, static links never children.
  std::map<std::string, std::string> parent_of;
  std::set<std::string> joint_names;
  for (const auto& j : m.joints) {
    const auto where = base + ".joint." + j.name;
    c.name(j.name, where);
    if (!joint_names.insert(j.name).second) c.add("DUPLICATE_NAME", where, "duplicate joint name");
    bool refs_ok = true;
    for (const auto* end : {&j.parent, &j.child}) {
      if (!links.contains(*end)) {
        c.add("UNKNOWN_LINK", where, "unknown link '" + *end + "'");
        refs_ok = false;
      }
    }
    if (std::abs(j.axis.norm() - 1.0) > kUnitTol) c.add("NOT_UNIT", where, "joint axis is not unit length");
    if (!j.anchor.allFinite()) c.add("RANGE", where, "anchor is not finite");
    if (!(j.lower <= j.upper)) c.add("RANGE", where, "joint limits need lower <= upper");
    if (!(j.max_effort >= 0.0)) c.add("RANGE", where, "max_effort must be >= 0");
    if (!(j.damping >= 0.0)) c.add("RANGE", where, "damping must be >= 0");
    if (!refs_ok) continue;
    if (j.parent == j.child) {
      c.add("JOINT_LOOP", where, "joint connects a link to itself");
      continue;
    }
    if (links[j.child]->is_static()) c.add("STATIC_CHILD", where, "static link '" + j.child + "' cannot be a joint child");
    if (parent_of.contains(j.child)) {
      c.add("JOINT_LOOP", where, "link '" + j.child + "' already has a parent joint");
      continue;
    }
    // Walking up from the parent must not reach the child.
    std::string cur = j.parent;
    bool loop = false;
    for (std::size_t guard = 0; guard <= parent_of.size(); ++guard) {
      if (cur == j.child) {
        loop = true;
        break;
      }
      auto it = parent_of.find(cur);
      if (it == parent_of.end()) break;
      cur = it->second;
    }
    if (loop) {
      c.add("JOINT_LOOP", where, "joint closes a loop through '" + j.child + "'");
      continue;
    }
    parent_of[j.child] = j.parent;
  }

  std::set<std::string> device_names;
  std::set<std::string> batteries;
  for (const auto& d : m.devices) {
    if (d.kind == DeviceKind::Battery) batteries.insert(d.id);
  }
  const double steps_per_second = 1.0 / world.dt;
  auto check_rate = [&](double rate, const std::string& where) {
    if (!(rate > 0.0 && rate <= 1000.0)) {
      c.add("RATE", where, "rate must be in (0, 1000] Hz");
      return;
    }
    double ratio = steps_per_second / rate;
    if (std::abs(ratio - std::round(ratio)) > 1e-6) {
      c.add("RATE", where, "rate must divide the step frequency " + std::to_string(steps_per_second) + " Hz evenly");
    }
  };
  for (const auto& d : m.devices) {
    const auto where = base + ".device." + d.id;
    c.name(d.id, where);
    if (!device_names.insert(d.id).second) c.add("DUPLICATE_NAME", where, "duplicate device id");
    if (!links.contains(d.link)) c.add("UNKNOWN_LINK", where, "unknown link '" + d.link + "'");
    c.pose(d.mount, where);
    check_rate(d.rate_hz, where);
    if (d.kind == DeviceKind::Accelerometer && !(d.noise_sigma >= 0.0)) c.add("RANGE", where, "noise_sigma must be >= 0");
    if (d.kind == DeviceKind::Proximity) c.positive(d.max_range, "max_range", where);
    if (d.kind == DeviceKind::Battery) {
      c.positive(d.capacity_j, "capacity", where);
      if (!(d.cost_j >= 0.0) || !(d.idle_w >= 0.0)) c.add("RANGE", where, "battery cost and idle draw must be >= 0");
    }
    if (!d.battery.empty() && !batteries.contains(d.battery)) {
      c.add("UNKNOWN_DEVICE", where, "unknown battery '" + d.battery + "'");
    }
  }
  for (const auto& d : m.displays) {
    const auto where = base + ".display." + d.id;
    c.name(d.id, where);
    if (!device_names.insert(d.id).second) c.add("DUPLICATE_NAME", where, "duplicate device id");
    if (!links.contains(d.link)) c.add("UNKNOWN_LINK", where, "unknown link '" + d.link + "'");
    c.pose(d.mount, where);
    c.positive(d.size_x, "display width in meters", where);
    c.positive(d.size_y, "display height in meters", where);
    if (d.width < 1 || d.height < 1 || d.width > 4096 || d.height > 4096) {
      c.add("RANGE", where, "display resolution must be 1..4096 px per side");
    }
    if (!d.battery.empty() && !batteries.contains(d.battery)) {
      c.add("UNKNOWN_DEVICE", where, "unknown battery '" + d.battery + "'");
    }
  }
  return out;
}

std::vector<Diagnostic> validate(const SceneSpec& spec) {
  std::vector<Diagnostic> out;
  Checker c(out);
  const auto& w = spec.world;
  if (spec.format_version != 1) c.add("FORMAT_VERSION", "scene", "unsupported scene_format");
  if (!w.gravity.allFinite()) c.add("RANGE", "world", "gravity is not finite");
  if (!(w.dt > 0.0 && w.dt <= 0.1)) c.add("RANGE", "world", "dt must be in (0, 0.1] s");
  if (w.solver_iterations < 1) c.add("RANGE", "world", "solver_iterations must be >= 1");
  if (!(w.baumgarte >= 0.0 && w.baumgarte <= 1.0)) c.add("RANGE", "world", "baumgarte must be in [0, 1]");
  if (!(w.slop >= 0.0)) c.add("RANGE", "world", "slop must be >= 0");

  std::set<std::string> model_names;
  for (const auto& m : spec.models) {
    if (!model_names.insert(m.name).second) c.add("DUPLICATE_NAME", "model." + m.name, "duplicate model name");
    auto diags = validate_model(m, w);
    out.insert(out.end(), diags.begin(), diags.end());
  }
  std::set<std::string> instance_names;
  for (const auto& i : spec.instances) {
    const auto where = "instance." + i.name;
    c.name(i.name, where);
    if (!instance_names.insert(i.name).second) c.add("DUPLICATE_NAME", where, "duplicate instance name");
    if (!model_names.contains(i.model)) c.add("UNKNOWN_MODEL", where, "unknown model '" + i.model + "'");
    c.pose(i.pose, where);
  }
  return out;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream o;
  for (const auto& d : diags) o << d.code << " " << d.where << ": " << d.message << "\n";
  return o.str();
}

}  // namespace vtui::scene
