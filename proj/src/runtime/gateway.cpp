#include "vtui/runtime/gateway.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <variant>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/core/detail/base64.hpp>
#include <boost/beast/websocket.hpp>

#include "vtui/devices/topics.hpp"
#include "vtui/error.hpp"
#include "vtui/runtime/run.hpp"
#include "vtui/runtime/simulation.hpp"

namespace vtui::runtime {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }
json pose_json(const Pose& p) { return {{"position", vec(p.position)}, {"orientation", quat(p.orientation)}}; }

json geometry_json(const scene::GeometryPrimitive& g) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, scene::Box>) {
          return {{"type", "box"}, {"half_extents", vec(s.half_extents)}};
        } else if constexpr (std::is_same_v<T, scene::Sphere>) {
          return {{"type", "sphere"}, {"radius", s.radius}};
        } else if constexpr (std::is_same_v<T, scene::Cylinder>) {
          return {{"type", "cylinder"}, {"radius", s.radius}, {"half_length", s.half_length}};
        } else {
          return {{"type", "plane"}, {"normal", vec(s.normal)}, {"offset", s.offset}};
        }
      },
      g);
}

Vec3 vec_from(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) throw Error(Errc::BadMessage, std::string(field) + " must be [x, y, z]");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw Error(Errc::BadMessage, std::string(field) + " must hold numbers");
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) throw Error(Errc::BadMessage, std::string(field) + " must be finite");
  return v;
}

Vec3 vec_or_zero(const json& msg, const char* field) {
  return msg.contains(field) ? vec_from(msg.at(field), field) : Vec3::Zero();
}

physics::BodyId resolve_body(const Simulation& sim, const json& ref) {
  if (ref.is_number_unsigned()) {
    auto id = ref.get<physics::BodyId>();
    sim.world().body(id);  // throws NoSuchBody
    return id;
  }
  if (ref.is_string()) {
    auto id = sim.world().find_body(ref.get<std::string>());
    if (!id) throw Error(Errc::NoSuchBody, ref.get<std::string>());
    return *id;
  }
  throw Error(Errc::BadMessage, "body must be an id or an \"instance/link\" name");
}

devices::TouchPhase phase_from(const json& msg) {
  std::string p = msg.value("phase", "down");
  if (p == "down") return devices::TouchPhase::Down;
  if (p == "move") return devices::TouchPhase::Move;
  if (p == "up") return devices::TouchPhase::Up;
  throw Error(Errc::BadMessage, "phase must be down, move or up");
}

std::string base64(const std::vector<std::uint8_t>& bytes) {
  std::string out(beast::detail::base64::encoded_size(bytes.size()), '\0');
  out.resize(beast::detail::base64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::pair<std::string, std::uint16_t> split_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::BadConfig, "listen address must be host:port");
  std::string host = listen.substr(0, colon);
  if (host.empty() || host == "*") host = "0.0.0.0";
  if (host == "localhost") host = "127.0.0.1";
  int port = -1;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (...) {
  }
  if (port < 0 || port > 65535) throw Error(Errc::BadConfig, "bad port in " + listen);
  return {host, static_cast<std::uint16_t>(port)};
}

json error_json(std::string_view code, const std::string& detail) {
  return {{"type", "error"}, {"protocol_version", kProtocolVersion}, {"code", code}, {"detail", detail}};
}

}  // namespace

json hello_json(const Simulation& sim) {
  return {{"type", "hello"},
          {"protocol_version", kProtocolVersion},
          {"dt", sim.world().config().dt},
          {"seed", sim.seed()},
          {"step_count", sim.step_count()}};
}

json scene_graph_json(const Simulation& sim) {
  json instances = json::array();
  std::set<std::string> models;
  for (const auto& inst : sim.instances().all()) {
    models.insert(inst.model.name);
    json links = json::array();
    for (const auto& link : inst.model.links) {
      links.push_back({{"name", link.name},
                       {"body", inst.body(link.name)},
                       {"geometry", geometry_json(link.geometry)},
                       {"color", json::array({link.color.r, link.color.g, link.color.b})},
                       {"mass", link.mass},
                       {"static", link.is_static()}});
    }
    json displays = json::array();
    for (const auto& d : inst.model.displays) {
      displays.push_back({{"id", inst.name + "/" + d.id},
                          {"link", d.link},
                          {"body", inst.body(d.link)},
                          {"mount", pose_json(d.mount)},
                          {"size", json::array({d.size_x, d.size_y})},
                          {"resolution", json::array({d.width, d.height})},
                          {"touch", d.touch}});
    }
    instances.push_back({{"id", inst.id},
                         {"name", inst.name},
                         {"model", inst.model.name},
                         {"pose", pose_json(inst.pose)},
                         {"links", links},
                         {"displays", displays}});
  }
  return {{"type", "scene_graph"},
          {"protocol_version", kProtocolVersion},
          {"models", models},
          {"instances", instances}};
}

json state_update_json(const physics::WorldState& s) {
  json bodies = json::array();
  for (const auto& b : s.bodies) {
    bodies.push_back({{"id", b.id},
                      {"name", b.name},
                      {"position", vec(b.pose.position)},
                      {"orientation", quat(b.pose.orientation)},
                      {"linear_velocity", vec(b.linear_velocity)},
                      {"angular_velocity", vec(b.angular_velocity)}});
  }
  return {{"type", "state_update"},
          {"protocol_version", kProtocolVersion},
          {"step_count", s.step_count},
          {"time", msgbus::nanos_to_seconds(s.stamp)},
          {"bodies", bodies}};
}

json display_frame_json(const std::string& instance, const devices::DisplayFrame& f) {
  return {{"type", "display_frame"},
          {"protocol_version", kProtocolVersion},
          {"display", instance + "/" + f.display_id},
          {"width", f.width},
          {"height", f.height},
          {"encoding", "rgb8"},
          {"data", base64(f.pixels)}};
}

class Session;

struct Gateway::Impl : std::enable_shared_from_this<Gateway::Impl> {
  Impl(Simulation& s, RunControl& c) : sim(s), control(c), acceptor(ioc), timer(ioc) {}

  Simulation& sim;
  RunControl& control;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::steady_timer timer;
  std::thread thread;
  bool started = false;
  std::uint16_t port = 0;
  bool stopped = false;

  // io thread only
  std::set<std::shared_ptr<Session>> sessions;
  std::map<std::string, json> frame_cache;  // by display id
  msgbus::Subscription state_sub;
  std::vector<std::pair<std::string, msgbus::Subscription>> frame_subs;  // (instance, sub)

  // written on the simulation thread, read on the io thread
  std::mutex graph_mutex;
  std::string graph;
  std::string hello;

  std::atomic<std::size_t> open{0};
  std::atomic<std::uint64_t> dropped{0};

  static constexpr const char* kNode = "gateway";

  void subscribe_displays(const scene::ModelInstance& inst);
  void refresh_graph();
  void accept();
  void poll();
  void on_open(const std::shared_ptr<Session>& s);
  void on_close(const std::shared_ptr<Session>& s);
  void broadcast(const std::string& text, bool droppable);
  void handle(const std::shared_ptr<Session>& s, const std::string& text);
  void reply(const std::weak_ptr<Session>& s, json msg);
};

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, Gateway::Impl& gw) : ws_(std::move(socket)), gw_(gw) {}

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kMaxFrameBytes);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->gw_.on_open(self);
      self->read();
    });
  }

  void send(std::string text, bool droppable) {
    if (closed_) return;
    if (queue_.size() >= kSendQueueLimit) {
      // The front may be in flight; never touch it.
      for (auto it = queue_.begin() + (writing_ ? 1 : 0); it != queue_.end(); ++it) {
        if (it->second) {
          queue_.erase(it);
          gw_.dropped.fetch_add(1);
          break;
        }
      }
    }
    queue_.emplace_back(std::move(text), droppable);
    if (!writing_) write_next();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(ws_).close();
  }

  std::optional<physics::BodyId> selected;

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        // message_too_big: Beast has already sent close code 1009.
        self->closed_ = true;
        self->gw_.on_close(self);
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->gw_.handle(self, text);
      self->read();
    });
  }

  void write_next() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front().first), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->writing_ = false;
        self->closed_ = true;
        self->gw_.on_close(self);
        return;
      }
      self->queue_.pop_front();
      if (self->queue_.empty() || self->closed_) {
        self->writing_ = false;
      } else {
        self->write_next();
      }
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::pair<std::string, bool>> queue_;
  bool writing_ = false;
  bool closed_ = false;
  Gateway::Impl& gw_;
};

void Gateway::Impl::subscribe_displays(const scene::ModelInstance& inst) {
  for (const auto& d : inst.model.displays) {
    auto topic = devices::device_topic(inst.name, d.id, devices::Channel::Frame);
    frame_subs.emplace_back(inst.name,
                            sim.bus().subscribe(kNode, topic, std::string(devices::DisplayFrame::type_tag), 4));
  }
}

void Gateway::Impl::refresh_graph() {
  std::string g = scene_graph_json(sim).dump();
  std::string h = hello_json(sim).dump();
  std::lock_guard lock(graph_mutex);
  graph = std::move(g);
  hello = std::move(h);
}

void Gateway::Impl::accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    auto s = std::make_shared<Session>(std::move(socket), *self);
    self->sessions.insert(s);
    self->open = self->sessions.size();
    s->run();
    self->accept();
  });
}

void Gateway::Impl::poll() {
  for (auto& env : state_sub.drain()) {
    auto state = physics::decode_world_state(env.payload);
    broadcast(state_update_json(state).dump(), true);
  }
  for (auto& [instance, sub] : frame_subs) {
    for (auto& env : sub.drain()) {
      auto frame = devices::decode<devices::DisplayFrame>(env.payload);
      json j = display_frame_json(instance, frame);
      std::string text = j.dump();
      std::string key = j["display"];
      frame_cache[key] = std::move(j);
      broadcast(text, false);
    }
  }
  timer.expires_after(std::chrono::milliseconds(2));
  timer.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (!ec && !self->stopped) self->poll();
  });
}

void Gateway::Impl::on_open(const std::shared_ptr<Session>& s) {
  std::string h, g;
  {
    std::lock_guard lock(graph_mutex);
    h = hello;
    g = graph;
  }
  s->send(h, false);
  s->send(g, false);
  for (const auto& [id, frame] : frame_cache) s->send(frame.dump(), false);
}

void Gateway::Impl::on_close(const std::shared_ptr<Session>& s) {
  sessions.erase(s);
  open = sessions.size();
}

void Gateway::Impl::broadcast(const std::string& text, bool droppable) {
  for (const auto& s : sessions) s->send(text, droppable);
}

void Gateway::Impl::reply(const std::weak_ptr<Session>& s, json msg) {
  net::post(ioc, [s, text = msg.dump()]() mutable {
    if (auto session = s.lock()) session->send(std::move(text), false);
  });
}

void Gateway::Impl::handle(const std::shared_ptr<Session>& session, const std::string& text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::exception& e) {
    session->send(error_json(to_string(Errc::BadMessage), std::string("malformed JSON: ") + e.what()).dump(), false);
    return;
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    session->send(error_json(to_string(Errc::BadMessage), "message must be an object with a string type").dump(),
                  false);
    return;
  }
  const std::string type = msg["type"];
  std::weak_ptr<Session> weak = session;
  auto self = shared_from_this();

  auto fail = [&](const std::string& code, const std::string& detail) {
    json e = error_json(code, detail);
    e["cmd"] = type;
    if (msg.contains("id")) e["id"] = msg["id"];
    session->send(e.dump(), false);
  };

  // Runs `body` at the next step boundary and answers with an ack tagged
  // with the step count at which it was applied.
  auto at_boundary = [&](std::function<json(Simulation&)> body) {
    json id = msg.contains("id") ? msg["id"] : json();
    sim.post([self, weak, type, id, body = std::move(body)](Simulation& sim) {
      json out;
      try {
        json extra = body(sim);
        out = {{"type", "ack"}, {"protocol_version", kProtocolVersion}, {"cmd", type}, {"step_count", sim.step_count()}};
        if (extra.is_object()) out.update(extra);
      } catch (const Error& e) {
        out = error_json(to_string(e.code()), e.what());
        out["cmd"] = type;
        out["step_count"] = sim.step_count();
      }
      if (!id.is_null()) out["id"] = id;
      self->reply(weak, std::move(out));
    });
    control.notify();
  };

  try {
    if (type == "hello") {
      int v = msg.value("protocol_version", kProtocolVersion);
      if (v != kProtocolVersion) {
        fail(std::string(to_string(Errc::BadMessage)), "unsupported protocol_version " + std::to_string(v));
        return;
      }
      at_boundary([](Simulation&) { return json(); });
    } else if (type == "apply_wrench") {
      if (!msg.contains("body")) throw Error(Errc::BadMessage, "apply_wrench needs body");
      json ref = msg["body"];
      physics::WrenchCommand cmd;
      cmd.force = vec_or_zero(msg, "force");
      cmd.torque = vec_or_zero(msg, "torque");
      cmd.application_point = vec_or_zero(msg, "point");
      cmd.duration = msg.value("duration", physics::WrenchCommand::kSingleStep);
      if (!(cmd.duration >= 0.0)) throw Error(Errc::BadMessage, "duration must be >= 0");
      at_boundary([ref, cmd](Simulation& sim) mutable {
        cmd.body = resolve_body(sim, ref);
        sim.world().apply_wrench(cmd);
        return json{{"body", cmd.body}};
      });
    } else if (type == "touch") {
      std::string display = msg.value("display", "");
      auto phase = phase_from(msg);
      if (msg.contains("point")) {
        Vec3 p = vec_from(msg["point"], "point");
        at_boundary([display, phase, p](Simulation& sim) {
          auto ev = sim.devices().touch_at(display, p, phase, devices::TouchSource::Ui);
          return json{{"display", display}, {"u", ev.u}, {"v", ev.v}};
        });
      } else {
        if (!msg.contains("u") || !msg.contains("v") || !msg["u"].is_number_unsigned() ||
            !msg["v"].is_number_unsigned()) {
          throw Error(Errc::BadMessage, "touch needs point or unsigned u and v");
        }
        auto u = msg["u"].get<std::uint32_t>();
        auto v = msg["v"].get<std::uint32_t>();
        at_boundary([display, phase, u, v](Simulation& sim) {
          sim.devices().touch_pixel(display, u, v, phase, devices::TouchSource::Ui);
          return json{{"display", display}, {"u", u}, {"v", v}};
        });
      }
    } else if (type == "spawn") {
      std::string model = msg.value("model", "");
      std::string name = msg.value("name", "");
      Pose pose;
      if (msg.contains("position")) pose.position = vec_from(msg["position"], "position");
      if (msg.contains("rpy")) {
        Vec3 r = vec_from(msg["rpy"], "rpy");
        pose.orientation = Eigen::AngleAxisd(r.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(r.y(), Vec3::UnitY()) *
                           Eigen::AngleAxisd(r.x(), Vec3::UnitX());
      }
      at_boundary([self, model, name, pose](Simulation& sim) {
        const auto& inst = sim.spawn(model, pose, name);
        self->refresh_graph();
        std::vector<std::pair<std::string, msgbus::Subscription>> subs;
        for (const auto& d : inst.model.displays) {
          auto topic = devices::device_topic(inst.name, d.id, devices::Channel::Frame);
          subs.emplace_back(inst.name,
                            sim.bus().subscribe(kNode, topic, std::string(devices::DisplayFrame::type_tag), 4));
        }
        std::string graph;
        {
          std::lock_guard lock(self->graph_mutex);
          graph = self->graph;
        }
        net::post(self->ioc, [self, graph, subs = std::move(subs)]() mutable {
          for (auto& s : subs) self->frame_subs.push_back(std::move(s));
          self->broadcast(graph, false);
        });
        return json{{"instance", inst.name}};
      });
    } else if (type == "pause") {
      at_boundary([self](Simulation&) {
        self->control.pause();
        return json();
      });
    } else if (type == "resume") {
      at_boundary([self](Simulation&) {
        self->control.resume();
        return json();
      });
    } else if (type == "step_n") {
      if (!msg.contains("n") || !msg["n"].is_number_unsigned()) throw Error(Errc::BadMessage, "step_n needs n >= 1");
      auto n = msg["n"].get<std::uint64_t>();
      if (n == 0) throw Error(Errc::BadMessage, "step_n needs n >= 1");
      at_boundary([self, n](Simulation&) {
        self->control.add_steps(n);
        return json{{"n", n}};
      });
    } else if (type == "select") {
      json ref = msg.contains("body") ? msg["body"] : json();
      at_boundary([self, weak, ref](Simulation& sim) {
        std::optional<physics::BodyId> id;
        if (!ref.is_null()) id = resolve_body(sim, ref);
        net::post(self->ioc, [weak, id] {
          if (auto s = weak.lock()) s->selected = id;
        });
        return id ? json{{"body", *id}} : json{{"body", nullptr}};
      });
    } else {
      fail(std::string(to_string(Errc::BadMessage)), "unknown type '" + type + "'");
    }
  } catch (const Error& e) {
    fail(std::string(to_string(e.code())), e.what());
  } catch (const json::exception& e) {
    fail(std::string(to_string(Errc::BadMessage)), e.what());
  }
}

Gateway::Gateway(Simulation& sim, RunControl& control, const std::string& listen)
    : impl_(std::make_shared<Impl>(sim, control)) {
  auto [host, port] = split_listen(listen);
  beast::error_code ec;
  auto address = net::ip::make_address(host, ec);
  if (ec) throw Error(Errc::BadConfig, "bad listen address " + host);
  tcp::endpoint ep(address, port);
  auto& a = impl_->acceptor;
  a.open(ep.protocol(), ec);
  if (!ec) a.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) a.bind(ep, ec);
  if (!ec) a.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(Errc::BadConfig, "cannot listen on " + listen + ": " + ec.message());

  impl_->port = a.local_endpoint().port();
  impl_->state_sub = sim.bus().subscribe(Impl::kNode, std::string(physics::kStateTopic),
                                         std::string(physics::WorldState::type_tag), 256);
  for (const auto& inst : sim.instances().all()) impl_->subscribe_displays(inst);
  impl_->refresh_graph();
}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  if (impl_->started) return;
  impl_->started = true;
  impl_->accept();
  impl_->poll();
  impl_->thread = std::thread([impl = impl_] { impl->ioc.run(); });
}

void Gateway::stop() {
  if (!impl_->started || impl_->stopped) return;
  net::post(impl_->ioc, [impl = impl_] {
    impl->stopped = true;
    beast::error_code ec;
    impl->acceptor.close(ec);
    impl->timer.cancel();
    for (const auto& s : impl->sessions) s->close();
    impl->sessions.clear();
    impl->open = 0;
    impl->ioc.stop();
  });
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->stopped = true;
}

std::uint16_t Gateway::port() const { return impl_->port; }

std::size_t Gateway::connections() const { return impl_->open.load(); }
std::uint64_t Gateway::dropped_updates() const { return impl_->dropped.load(); }

}  // namespace vtui::runtime
