#include "vtui/devices/hub.hpp"

#include <algorithm>
#include <cmath>

#include "vtui/devices/topics.hpp"
#include "vtui/error.hpp"

namespace vtui::devices {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct StreamItem {
  Nanos stamp = 0;
  msgbus::NodeId publisher;
  msgbus::Bytes payload;
};

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Unbound: return "unbound";
    case Backend::Virtual: return "virtual";
    case Backend::Replay: return "replay";
    case Backend::Scripted: return "scripted";
  }
  return "?";
}

struct DeviceHub::DeviceEntry {
  std::string instance;
  scene::DeviceDescriptor desc;
  physics::BodyId host = 0;
  std::string topic;
  std::string type_tag;
  std::uint64_t period = 1;  // steps between samples
  Backend backend = Backend::Unbound;
  msgbus::Publisher publisher;
  std::mt19937_64 rng;
  // Externally fed backends.
  std::vector<StreamItem> stream;
  std::size_t next = 0;
  std::map<msgbus::NodeId, msgbus::Publisher> stream_publishers;
  // Battery kind only.
  std::optional<Battery> battery;
  std::uint64_t pending_messages = 0;
  msgbus::Subscription commands;
};

struct DeviceHub::DisplayEntry {
  std::string instance;
  scene::DisplaySpec spec;
  physics::BodyId host = 0;
  msgbus::Publisher frame_pub;
  msgbus::Publisher touch_pub;
  msgbus::Subscription commands;
  std::optional<DisplayFrame> frame;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> touching;
};

DeviceHub::DeviceHub(msgbus::Bus& bus, const physics::World& world, std::uint64_t seed, msgbus::NodeId node)
    : bus_(bus), world_(world), seed_(seed), node_(std::move(node)) {}

DeviceHub::~DeviceHub() = default;

void DeviceHub::attach(const scene::ModelInstance& inst) {
  const double dt = world_.config().dt;
  for (const auto& d : inst.model.devices) {
    auto e = std::make_unique<DeviceEntry>();
    e->instance = inst.name;
    e->desc = d;
    e->host = inst.body(d.link);
    auto topics = device_topics(inst.name, d);
    e->topic = topics.front().first;
    e->type_tag = topics.front().second;
    for (const auto& [topic, tag] : topics) bus_.declare(topic, tag);
    e->period = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(1.0 / (d.rate_hz * dt))));
    std::string path = inst.name + "/" + d.id;
    std::seed_seq seq{seed_, fnv1a(path)};
    e->rng.seed(seq);
    if (d.kind == scene::DeviceKind::Battery) {
      e->battery.emplace(d);
      e->commands = bus_.subscribe(node_, device_topic(inst.name, d.id, Channel::Cmd),
                                   std::string(BatteryCommand::type_tag), 16);
    }
    devices_[path] = std::move(e);
  }
  for (const auto& d : inst.model.displays) {
    auto e = std::make_unique<DisplayEntry>();
    e->instance = inst.name;
    e->spec = d;
    e->host = inst.body(d.link);
    std::string tag(DisplayFrame::type_tag);
    e->frame_pub = bus_.advertise(node_, device_topic(inst.name, d.id, Channel::Frame), tag, {.latched = true});
    e->commands = bus_.subscribe(node_, device_topic(inst.name, d.id, Channel::Cmd), tag, 16);
    if (d.touch) {
      e->touch_pub = bus_.advertise(node_, device_topic(inst.name, d.id, Channel::Touch),
                                    std::string(TouchEvent::type_tag));
    }
    displays_[inst.name + "/" + d.id] = std::move(e);
  }
}

DeviceHub::DeviceEntry& DeviceHub::device_entry(const std::string& device) {
  auto it = devices_.find(device);
  if (it == devices_.end()) throw Error(Errc::NoSuchDevice, device);
  return *it->second;
}

const DeviceHub::DeviceEntry& DeviceHub::device_entry(const std::string& device) const {
  auto it = devices_.find(device);
  if (it == devices_.end()) throw Error(Errc::NoSuchDevice, device);
  return *it->second;
}

DeviceHub::DisplayEntry& DeviceHub::display_entry(const std::string& display) {
  auto it = displays_.find(display);
  if (it == displays_.end()) throw Error(Errc::NoSuchDevice, display);
  return *it->second;
}

const DeviceHub::DisplayEntry& DeviceHub::display_entry(const std::string& display) const {
  auto it = displays_.find(display);
  if (it == displays_.end()) throw Error(Errc::NoSuchDevice, display);
  return *it->second;
}

void DeviceHub::bind_virtual(const std::string& device) {
  auto& e = device_entry(device);
  if (e.backend != Backend::Unbound) throw Error(Errc::AlreadyBound, device + " is bound to " + std::string(to_string(e.backend)));
  e.publisher = bus_.advertise(node_, e.topic, e.type_tag);
  e.backend = Backend::Virtual;
}

void DeviceHub::bind_replay(const std::string& device, const msgbus::BagFile& bag, const std::string& source_topic) {
  auto& e = device_entry(device);
  if (e.backend != Backend::Unbound) throw Error(Errc::AlreadyBound, device + " is bound to " + std::string(to_string(e.backend)));
  const std::string& source = source_topic.empty() ? e.topic : source_topic;
  auto it = bag.topics.find(source);
  if (it == bag.topics.end()) throw Error(Errc::BadConfig, "bag has no topic " + source);
  if (it->second != e.type_tag) {
    throw Error(Errc::TypeTagConflict, source + " carries " + it->second + ", device expects " + e.type_tag);
  }
  std::vector<StreamItem> stream;
  for (const auto& r : bag.records) {
    if (r.topic == source) stream.push_back({r.stamp, "replay:" + r.publisher, r.payload});
  }
  if (stream.size() >= 2) {
    double span = msgbus::nanos_to_seconds(stream.back().stamp - stream.front().stamp);
    double rate = span > 0.0 ? static_cast<double>(stream.size() - 1) / span : HUGE_VAL;
    if (std::abs(rate - e.desc.rate_hz) > kRateTolerance * e.desc.rate_hz) {
      throw Error(Errc::RateMismatch, source + " runs at " + std::to_string(rate) + " Hz, " + device + " expects " +
                                          std::to_string(e.desc.rate_hz) + " Hz");
    }
  }
  e.stream = std::move(stream);
  e.next = 0;
  e.backend = Backend::Replay;
}

void DeviceHub::bind_scripted(const std::string& device, std::vector<ScriptedSample> samples) {
  auto& e = device_entry(device);
  if (e.backend != Backend::Unbound) throw Error(Errc::AlreadyBound, device + " is bound to " + std::string(to_string(e.backend)));
  std::stable_sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.stamp < b.stamp; });
  e.stream.clear();
  for (auto& s : samples) e.stream.push_back({s.stamp, "script", std::move(s.payload)});
  e.next = 0;
  e.backend = Backend::Scripted;
}

void DeviceHub::unbind(const std::string& device) {
  auto& e = device_entry(device);
  e.backend = Backend::Unbound;
  e.publisher = {};
  e.stream.clear();
  e.next = 0;
}

void DeviceHub::bind_remaining_virtual() {
  for (auto& [path, e] : devices_) {
    if (e->backend == Backend::Unbound) bind_virtual(path);
  }
}

Backend DeviceHub::backend(const std::string& device) const { return device_entry(device).backend; }

std::vector<std::string> DeviceHub::devices() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : devices_) out.push_back(k);
  return out;
}

std::vector<std::string> DeviceHub::displays() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : displays_) out.push_back(k);
  return out;
}

const scene::DeviceDescriptor& DeviceHub::descriptor(const std::string& device) const {
  return device_entry(device).desc;
}

const scene::DisplaySpec& DeviceHub::display(const std::string& display) const {
  return display_entry(display).spec;
}

std::string DeviceHub::stream_topic(const std::string& device) const { return device_entry(device).topic; }

physics::BodyId DeviceHub::display_body(const std::string& display) const { return display_entry(display).host; }

Battery* DeviceHub::battery_for(const std::string& instance, const std::string& battery_id) {
  if (battery_id.empty()) return nullptr;
  auto it = devices_.find(instance + "/" + battery_id);
  if (it == devices_.end() || !it->second->battery) return nullptr;
  return &*it->second->battery;
}

void DeviceHub::count_message(const std::string& instance, const std::string& battery_id) {
  if (battery_id.empty()) return;
  auto it = devices_.find(instance + "/" + battery_id);
  if (it != devices_.end()) ++it->second->pending_messages;
}

void DeviceHub::present(const std::string& display, const DisplayFrame& frame) {
  auto& d = display_entry(display);
  if (frame.width != static_cast<std::uint32_t>(d.spec.width) ||
      frame.height != static_cast<std::uint32_t>(d.spec.height) || !frame.consistent()) {
    throw Error(Errc::DimensionMismatch, display + " is " + std::to_string(d.spec.width) + "x" +
                                             std::to_string(d.spec.height) + ", frame is " +
                                             std::to_string(frame.width) + "x" + std::to_string(frame.height));
  }
  if (Battery* b = battery_for(d.instance, d.spec.battery); b && b->depleted()) {
    throw Error(Errc::BatteryDepleted, display);
  }
  d.frame = frame;
  d.frame->display_id = d.spec.id;
  publish_frame(d);
}

void DeviceHub::publish_frame(DisplayEntry& d) {
  bus_.publish_at(d.frame_pub, encode(*d.frame), world_now());
  count_message(d.instance, d.spec.battery);
}

std::optional<DisplayFrame> DeviceHub::current_frame(const std::string& display) const {
  return display_entry(display).frame;
}

TouchEvent DeviceHub::touch_at(const std::string& display, const Vec3& world_point, TouchPhase phase,
                               TouchSource source) {
  auto& d = display_entry(display);
  auto t = map_touch(world_, d.host, d.spec, world_point, phase, source);
  if (d.touch_pub) bus_.publish_at(d.touch_pub, encode(t), world_now());
  return t;
}

void DeviceHub::touch_pixel(const std::string& display, std::uint32_t u, std::uint32_t v, TouchPhase phase,
                            TouchSource source) {
  auto& d = display_entry(display);
  if (u >= static_cast<std::uint32_t>(d.spec.width) || v >= static_cast<std::uint32_t>(d.spec.height)) {
    throw Error(Errc::OffSurface, "pixel outside " + display);
  }
  if (!d.touch_pub) throw Error(Errc::NoSuchDevice, display + " is not touch-sensitive");
  TouchEvent t{d.spec.id, u, v, phase, source};
  bus_.publish_at(d.touch_pub, encode(t), world_now());
}

BatteryState DeviceHub::battery_state(const std::string& battery) const {
  const auto& e = device_entry(battery);
  if (!e.battery) throw Error(Errc::NoSuchDevice, battery + " is not a battery");
  return e.battery->state(world_now());
}

void DeviceHub::charge(const std::string& battery, double joules) {
  auto& e = device_entry(battery);
  if (!e.battery) throw Error(Errc::NoSuchDevice, battery + " is not a battery");
  e.battery->charge(joules);
}

Nanos DeviceHub::world_now() const {
  return static_cast<Nanos>(world_.step_count()) * msgbus::seconds_to_nanos(world_.config().dt);
}

void DeviceHub::derive_touches(DisplayEntry& d) {
  if (!d.touch_pub) return;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> now;
  for (const auto& c : world_.contacts()) {
    if (c.body_a != d.host && c.body_b != d.host) continue;
    try {
      auto t = map_touch(world_, d.host, d.spec, c.point);
      now = std::pair{t.u, t.v};
      break;
    } catch (const Error&) {
    }
  }
  auto send = [&](std::pair<std::uint32_t, std::uint32_t> px, TouchPhase phase) {
    TouchEvent t{d.spec.id, px.first, px.second, phase, TouchSource::Contact};
    bus_.publish_at(d.touch_pub, encode(t), world_now());
    count_message(d.instance, d.spec.battery);
  };
  if (now && !d.touching) send(*now, TouchPhase::Down);
  else if (now && d.touching && *now != *d.touching) send(*now, TouchPhase::Move);
  else if (!now && d.touching) send(*d.touching, TouchPhase::Up);
  d.touching = now;
}

void DeviceHub::on_step(Nanos now) {
  const std::uint64_t step = world_.step_count();

  for (auto& [path, d] : displays_) {
    for (auto& env : d->commands.drain()) {
      try {
        present(path, decode<DisplayFrame>(env.payload));
      } catch (const Error&) {
        ++rejected_;
      }
    }
  }
  for (auto& [path, e] : devices_) {
    if (!e->battery) continue;
    for (auto& env : e->commands.drain()) {
      try {
        e->battery->charge(decode<BatteryCommand>(env.payload).charge_j);
      } catch (const Error&) {
        ++rejected_;
      }
    }
  }

  auto produce = [&](DeviceEntry& e) {
    switch (e.backend) {
      case Backend::Unbound:
        return;
      case Backend::Virtual: {
        if (step % e.period != 0) return;
        if (Battery* b = battery_for(e.instance, e.desc.battery); b && b->depleted()) return;
        msgbus::Bytes payload;
        using K = scene::DeviceKind;
        switch (e.desc.kind) {
          case K::Accelerometer:
            payload = encode(sample_accelerometer(world_, e.host, e.desc, now, &e.rng));
            break;
          case K::Proximity:
            payload = encode(sample_proximity(world_, e.host, e.desc, now));
            break;
          case K::Contact:
            payload = encode(sample_contact(world_, e.host, now));
            break;
          case K::Battery:
            payload = encode(e.battery->state(now));
            break;
          case K::Display:
          case K::Touchscreen:
            return;
        }
        bus_.publish_at(e.publisher, payload, now);
        count_message(e.instance, e.desc.battery);
        return;
      }
      case Backend::Replay:
      case Backend::Scripted:
        while (e.next < e.stream.size() && e.stream[e.next].stamp <= now) {
          auto& item = e.stream[e.next++];
          auto& pub = e.stream_publishers[item.publisher];
          if (!pub) pub = bus_.advertise(item.publisher, e.topic, e.type_tag);
          bus_.publish_at(pub, item.payload, now);
          count_message(e.instance, e.desc.battery);
        }
        return;
    }
  };

  for (auto& [path, e] : devices_) {
    if (!e->battery) produce(*e);
  }
  for (auto& [path, d] : displays_) derive_touches(*d);
  const double dt = world_.config().dt;
  for (auto& [path, e] : devices_) {
    if (!e->battery) continue;
    e->battery->tick(dt, e->pending_messages, now);
    e->pending_messages = 0;
    produce(*e);
  }
}

}  // namespace vtui::devices
