#include "vtui/scene/format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "vtui/scene/validate.hpp"

namespace vtui::scene {

namespace {

struct Token {
  std::string_view text;
  int column = 0;
};

enum class Section { Top, World, Model, Link, Joint, Device, Display, Instance };

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  SceneSpec run() {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      auto eol = text_.find('\n', pos);
      if (eol == std::string_view::npos) eol = text_.size();
      line_ = ++line_no;
      handle_line(text_.substr(pos, eol - pos));
      pos = eol + 1;
    }
    return std::move(spec_);
  }

 private:
  [[noreturn]] void fail(Errc code, int column, const std::string& what) const {
    throw ParseError(code, line_, column, what);
  }

  static std::vector<Token> tokenize(std::string_view s, int base_column) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
      std::size_t start = i;
      while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
      if (i > start) out.push_back({s.substr(start, i - start), base_column + static_cast<int>(start)});
    }
    return out;
  }

  void handle_line(std::string_view raw) {
    auto hash = raw.find('#');
    std::string_view line = raw.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return;
    int col = static_cast<int>(first) + 1;
    line = line.substr(first);
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(0, last + 1);

    if (line.front() == '[') {
      if (line.back() != ']') fail(Errc::SyntaxError, col, "section header missing ']'");
      open_section(tokenize(line.substr(1, line.size() - 2), col + 1), col);
      return;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(Errc::SyntaxError, col, "expected 'key = value'");
    auto key_tokens = tokenize(line.substr(0, eq), col);
    if (key_tokens.size() != 1) fail(Errc::SyntaxError, col, "expected a single key before '='");
    auto values = tokenize(line.substr(eq + 1), col + static_cast<int>(eq) + 1);
    if (values.empty()) fail(Errc::SyntaxError, col + static_cast<int>(eq) + 1, "missing value");
    assign(key_tokens[0], values);
  }

  void open_section(const std::vector<Token>& words, int col) {
    if (words.empty()) fail(Errc::SyntaxError, col, "empty section header");
    auto kind = words[0].text;
    auto name = [&]() -> std::string {
      if (words.size() != 2) fail(Errc::SyntaxError, col, "section [" + std::string(kind) + "] needs exactly one name");
      return std::string(words[1].text);
    };
    auto need_model = [&] {
      if (!model_) fail(Errc::SyntaxError, col, "[" + std::string(kind) + "] must appear inside a [model]");
    };
    if (kind == "world") {
      if (words.size() != 1) fail(Errc::SyntaxError, col, "[world] takes no name");
      section_ = Section::World;
      model_ = nullptr;
    } else if (kind == "model") {
      spec_.models.push_back({});
      model_ = &spec_.models.back();
      model_->name = name();
      section_ = Section::Model;
    } else if (kind == "link") {
      need_model();
      model_->links.push_back({});
      model_->links.back().name = name();
      section_ = Section::Link;
    } else if (kind == "joint") {
      need_model();
      model_->joints.push_back({});
      model_->joints.back().name = name();
      section_ = Section::Joint;
    } else if (kind == "device") {
      need_model();
      model_->devices.push_back({});
      model_->devices.back().id = name();
      section_ = Section::Device;
    } else if (kind == "display") {
      need_model();
      model_->displays.push_back({});
      model_->displays.back().id = name();
      section_ = Section::Display;
    } else if (kind == "instance") {
      spec_.instances.push_back({});
      spec_.instances.back().name = name();
      model_ = nullptr;
      section_ = Section::Instance;
    } else {
      fail(Errc::UnknownField, words[0].column, "unknown section [" + std::string(kind) + "]");
    }
  }

  // --- value helpers -------------------------------------------------------

  double number(const Token& t) const {
    double v = 0.0;
    const char* b = t.text.data();
    const char* e = b + t.text.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec == std::errc() && ptr == e) return v;
    if (ptr != b && ec == std::errc()) {
      fail(Errc::BadUnit, t.column, "'" + std::string(t.text) + "': values are plain SI numbers without units");
    }
    fail(Errc::SyntaxError, t.column, "expected a number, got '" + std::string(t.text) + "'");
  }

  std::vector<double> numbers(const std::vector<Token>& v, std::size_t min_n, std::size_t max_n) const {
    if (v.size() < min_n || v.size() > max_n) {
      fail(Errc::SyntaxError, v.front().column,
           "expected " + std::to_string(min_n) + (min_n == max_n ? "" : "-" + std::to_string(max_n)) + " numbers");
    }
    std::vector<double> out;
    for (const auto& t : v) out.push_back(number(t));
    return out;
  }

  double scalar(const std::vector<Token>& v) const { return numbers(v, 1, 1)[0]; }

  Vec3 vec3(const std::vector<Token>& v) const {
    auto n = numbers(v, 3, 3);
    return {n[0], n[1], n[2]};
  }

  std::string word(const std::vector<Token>& v) const {
    if (v.size() != 1) fail(Errc::SyntaxError, v.front().column, "expected a single word");
    return std::string(v[0].text);
  }

  bool boolean(const std::vector<Token>& v) const {
    auto w = word(v);
    if (w == "true") return true;
    if (w == "false") return false;
    fail(Errc::SyntaxError, v[0].column, "expected true or false");
  }

  std::uint64_t unsigned_int(const std::vector<Token>& v) const {
    if (v.size() != 1) fail(Errc::SyntaxError, v.front().column, "expected an integer");
    std::uint64_t out = 0;
    const char* b = v[0].text.data();
    const char* e = b + v[0].text.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || ptr != e) fail(Errc::SyntaxError, v[0].column, "expected a non-negative integer");
    return out;
  }

  int integer(const std::vector<Token>& v) const {
    double d = scalar(v);
    if (d != std::floor(d) || std::abs(d) > 1e9) fail(Errc::SyntaxError, v[0].column, "expected an integer");
    return static_cast<int>(d);
  }

  /// `x y z`, `x y z roll pitch yaw` or `x y z qw qx qy qz`.
  Pose pose(const std::vector<Token>& v) const {
    if (v.size() != 3 && v.size() != 6 && v.size() != 7) {
      fail(Errc::SyntaxError, v.front().column, "pose takes 3, 6 (x y z roll pitch yaw) or 7 (x y z qw qx qy qz) numbers");
    }
    auto n = numbers(v, 3, 7);
    Pose p;
    p.position = {n[0], n[1], n[2]};
    if (n.size() == 6) {
      p.orientation = Eigen::AngleAxisd(n[5], Vec3::UnitZ()) * Eigen::AngleAxisd(n[4], Vec3::UnitY()) *
                      Eigen::AngleAxisd(n[3], Vec3::UnitX());
    } else if (n.size() == 7) {
      p.orientation = Quat(n[3], n[4], n[5], n[6]);
    }
    return p;
  }

  GeometryPrimitive geometry(const std::vector<Token>& v) const {
    auto kind = v[0].text;
    std::vector<Token> rest(v.begin() + 1, v.end());
    if (rest.empty()) fail(Errc::SyntaxError, v[0].column, "geometry needs dimensions");
    if (kind == "box") return Box{vec3(rest)};
    if (kind == "sphere") return Sphere{scalar(rest)};
    if (kind == "cylinder") {
      auto n = numbers(rest, 2, 2);
      return Cylinder{n[0], n[1]};
    }
    if (kind == "plane") {
      auto n = numbers(rest, 4, 4);
      return StaticPlane{{n[0], n[1], n[2]}, n[3]};
    }
    fail(Errc::UnknownField, v[0].column, "unknown geometry '" + std::string(kind) + "'");
  }

  // --- assignment ----------------------------------------------------------

  void assign(const Token& key_tok, const std::vector<Token>& v) {
    const std::string key(key_tok.text);
    auto unknown = [&]() { fail(Errc::UnknownField, key_tok.column, "unknown field '" + key + "'"); };

    switch (section_) {
      case Section::Top:
        if (key == "scene_format") {
          spec_.format_version = integer(v);
          if (spec_.format_version != kSceneFormatVersion) {
            fail(Errc::SyntaxError, v[0].column, "unsupported scene_format " + std::to_string(spec_.format_version));
          }
        } else {
          unknown();
        }
        break;
      case Section::World: {
        auto& w = spec_.world;
        if (key == "gravity") w.gravity = vec3(v);
        else if (key == "dt") w.dt = scalar(v);
        else if (key == "seed") w.seed = unsigned_int(v);
        else if (key == "solver_iterations") w.solver_iterations = integer(v);
        else if (key == "baumgarte") w.baumgarte = scalar(v);
        else if (key == "slop") w.slop = scalar(v);
        else if (key == "sleeping") w.sleeping = boolean(v);
        else unknown();
        break;
      }
      case Section::Model:
        if (key.starts_with("param.") && key.size() > 6) model_->params[key.substr(6)] = scalar(v);
        else unknown();
        break;
      case Section::Link: {
        auto& l = model_->links.back();
        if (key == "geometry") l.geometry = geometry(v);
        else if (key == "mass") l.mass = scalar(v);
        else if (key == "inertia") {
          if (v.size() == 1 && v[0].text == "auto") {
            l.inertia.reset();
          } else {
            auto n = numbers(v, 6, 6);
            Mat3 m;
            m << n[0], n[3], n[4], n[3], n[1], n[5], n[4], n[5], n[2];
            l.inertia = m;
          }
        } else if (key == "friction") l.friction_mu = scalar(v);
        else if (key == "restitution") l.restitution = scalar(v);
        else if (key == "pose") l.initial_pose = pose(v);
        else if (key == "color") {
          auto n = numbers(v, 3, 3);
          for (double c : n) {
            if (c < 0 || c > 255 || c != std::floor(c)) fail(Errc::SyntaxError, v[0].column, "color channels are integers 0-255");
          }
          l.color = {static_cast<std::uint8_t>(n[0]), static_cast<std::uint8_t>(n[1]), static_cast<std::uint8_t>(n[2])};
        } else unknown();
        break;
      }
      case Section::Joint: {
        auto& j = model_->joints.back();
        if (key == "type") {
          auto t = word(v);
          if (t == "fixed") j.type = JointType::Fixed;
          else if (t == "revolute") j.type = JointType::Revolute;
          else if (t == "prismatic" || t == "sliding") j.type = JointType::Prismatic;
          else fail(Errc::UnknownField, v[0].column, "unknown joint type '" + t + "'");
        } else if (key == "parent") j.parent = word(v);
        else if (key == "child") j.child = word(v);
        else if (key == "axis") j.axis = vec3(v);
        else if (key == "anchor") j.anchor = vec3(v);
        else if (key == "limits") {
          auto n = numbers(v, 2, 2);
          j.lower = n[0];
          j.upper = n[1];
        } else if (key == "max_effort") j.max_effort = scalar(v);
        else if (key == "damping") j.damping = scalar(v);
        else unknown();
        break;
      }
      case Section::Device: {
        auto& d = model_->devices.back();
        if (key == "kind") {
          auto k = word(v);
          if (k == "accelerometer") d.kind = DeviceKind::Accelerometer;
          else if (k == "contact") d.kind = DeviceKind::Contact;
          else if (k == "proximity") d.kind = DeviceKind::Proximity;
          else if (k == "battery") d.kind = DeviceKind::Battery;
          else fail(Errc::UnknownField, v[0].column, "unknown device kind '" + k + "' (displays use [display])");
        } else if (key == "link") d.link = word(v);
        else if (key == "pose") d.mount = pose(v);
        else if (key == "rate") d.rate_hz = scalar(v);
        else if (key == "noise_sigma") d.noise_sigma = scalar(v);
        else if (key == "max_range") d.max_range = scalar(v);
        else if (key == "capacity") d.capacity_j = scalar(v);
        else if (key == "cost") d.cost_j = scalar(v);
        else if (key == "idle") d.idle_w = scalar(v);
        else if (key == "battery") d.battery = word(v);
        else unknown();
        break;
      }
      case Section::Display: {
        auto& d = model_->displays.back();
        if (key == "link") d.link = word(v);
        else if (key == "pose") d.mount = pose(v);
        else if (key == "size") {
          auto n = numbers(v, 2, 2);
          d.size_x = n[0];
          d.size_y = n[1];
        } else if (key == "resolution") {
          if (v.size() != 2) fail(Errc::SyntaxError, v[0].column, "resolution takes width height");
          d.width = integer({v[0]});
          d.height = integer({v[1]});
        } else if (key == "touch") d.touch = boolean(v);
        else if (key == "battery") d.battery = word(v);
        else unknown();
        break;
      }
      case Section::Instance: {
        auto& inst = spec_.instances.back();
        if (key == "model") inst.model = word(v);
        else if (key == "pose") inst.pose = pose(v);
        else unknown();
        break;
      }
    }
  }

  std::string_view text_;
  SceneSpec spec_;
  ModelSpec* model_ = nullptr;
  Section section_ = Section::Top;
  int line_ = 0;
};

// --- serialization ---------------------------------------------------------

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string nums(std::initializer_list<double> vs) {
  std::string out;
  for (double v : vs) {
    if (!out.empty()) out += ' ';
    out += num(v);
  }
  return out;
}

std::string vec(const Vec3& v) { return nums({v.x(), v.y(), v.z()}); }

std::string pose_str(const Pose& p) {
  const auto& q = p.orientation;
  return nums({p.position.x(), p.position.y(), p.position.z(), q.w(), q.x(), q.y(), q.z()});
}

std::string geometry_str(const GeometryPrimitive& g) {
  if (auto* b = std::get_if<Box>(&g)) return "box " + vec(b->half_extents);
  if (auto* s = std::get_if<Sphere>(&g)) return "sphere " + num(s->radius);
  if (auto* c = std::get_if<Cylinder>(&g)) return "cylinder " + nums({c->radius, c->half_length});
  const auto& p = std::get<StaticPlane>(g);
  return "plane " + vec(p.normal) + " " + num(p.offset);
}

}  // namespace

SceneSpec parse_scene_unchecked(std::string_view text) { return Parser(text).run(); }

SceneSpec parse_scene(std::string_view text) {
  auto spec = parse_scene_unchecked(text);
  auto diags = validate(spec);
  if (!diags.empty()) throw Error(Errc::ValidationFailed, format_diagnostics(diags));
  return spec;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SceneSpec load_scene_file(const std::filesystem::path& path) { return parse_scene(read_text_file(path)); }

std::string serialize_scene(const SceneSpec& spec) {
  std::ostringstream o;
  o << "scene_format = " << spec.format_version << "\n\n";
  const auto& w = spec.world;
  o << "[world]\n"
    << "gravity = " << vec(w.gravity) << "\n"
    << "dt = " << num(w.dt) << "\n"
    << "seed = " << w.seed << "\n"
    << "solver_iterations = " << w.solver_iterations << "\n"
    << "baumgarte = " << num(w.baumgarte) << "\n"
    << "slop = " << num(w.slop) << "\n"
    << "sleeping = " << (w.sleeping ? "true" : "false") << "\n";

  for (const auto& m : spec.models) {
    o << "\n[model " << m.name << "]\n";
    for (const auto& [k, v] : m.params) o << "param." << k << " = " << num(v) << "\n";
    for (const auto& l : m.links) {
      o << "\n  [link " << l.name << "]\n"
        << "  geometry = " << geometry_str(l.geometry) << "\n"
        << "  mass = " << num(l.mass) << "\n";
      if (l.inertia) {
        const auto& I = *l.inertia;
        o << "  inertia = " << nums({I(0, 0), I(1, 1), I(2, 2), I(0, 1), I(0, 2), I(1, 2)}) << "\n";
      } else {
        o << "  inertia = auto\n";
      }
      o << "  friction = " << num(l.friction_mu) << "\n"
        << "  restitution = " << num(l.restitution) << "\n"
        << "  pose = " << pose_str(l.initial_pose) << "\n"
        << "  color = " << int(l.color.r) << " " << int(l.color.g) << " " << int(l.color.b) << "\n";
    }
    for (const auto& j : m.joints) {
      o << "\n  [joint " << j.name << "]\n"
        << "  type = " << to_string(j.type) << "\n"
        << "  parent = " << j.parent << "\n"
        << "  child = " << j.child << "\n"
        << "  axis = " << vec(j.axis) << "\n"
        << "  anchor = " << vec(j.anchor) << "\n"
        << "  limits = " << nums({j.lower, j.upper}) << "\n"
        << "  max_effort = " << num(j.max_effort) << "\n"
        << "  damping = " << num(j.damping) << "\n";
    }
    for (const auto& d : m.devices) {
      o << "\n  [device " << d.id << "]\n"
        << "  kind = " << to_string(d.kind) << "\n"
        << "  link = " << d.link << "\n"
        << "  pose = " << pose_str(d.mount) << "\n"
        << "  rate = " << num(d.rate_hz) << "\n"
        << "  noise_sigma = " << num(d.noise_sigma) << "\n"
        << "  max_range = " << num(d.max_range) << "\n"
        << "  capacity = " << num(d.capacity_j) << "\n"
        << "  cost = " << num(d.cost_j) << "\n"
        << "  idle = " << num(d.idle_w) << "\n";
      if (!d.battery.empty()) o << "  battery = " << d.battery << "\n";
    }
    for (const auto& d : m.displays) {
      o << "\n  [display " << d.id << "]\n"
        << "  link = " << d.link << "\n"
        << "  pose = " << pose_str(d.mount) << "\n"
        << "  size = " << nums({d.size_x, d.size_y}) << "\n"
        << "  resolution = " << d.width << " " << d.height << "\n"
        << "  touch = " << (d.touch ? "true" : "false") << "\n";
      if (!d.battery.empty()) o << "  battery = " << d.battery << "\n";
    }
  }
  for (const auto& i : spec.instances) {
    o << "\n[instance " << i.name << "]\n"
      << "model = " << i.model << "\n"
      << "pose = " << pose_str(i.pose) << "\n";
  }
  return o.str();
}

}  // namespace vtui::scene
