#include "vtui/apps/marble.hpp"

#include <algorithm>
#include <cmath>

#include "vtui/devices/messages.hpp"
#include "vtui/devices/topics.hpp"
#include "vtui/error.hpp"
#include "vtui/wire.hpp"

namespace vtui::apps {

BallModelParams BallModelParams::from(const std::map<std::string, double>& params) {
  BallModelParams p;
  auto get = [&](const char* key, double& field) {
    if (auto it = params.find(key); it != params.end()) field = it->second;
  };
  get("r0", p.r0);
  get("growth", p.growth);
  get("tau", p.tau);
  get("r_min", p.r_min);
  get("r_max", p.r_max);
  get("squeeze_threshold", p.squeeze_threshold);
  if (!(p.r_min <= p.r0 && p.r0 <= p.r_max) || !(p.tau > 0.0) || !(p.r_min > 0.0)) {
    throw Error(Errc::BadConfig, "ball parameters need 0 < r_min <= r0 <= r_max and tau > 0");
  }
  return p;
}

double ball_radius(std::uint64_t n, double t, const BallModelParams& p) {
  double r = p.r0 * (1.0 + p.growth * std::log2(1.0 + static_cast<double>(n))) * std::exp(-t / p.tau);
  return std::clamp(r, p.r_min, p.r_max);
}

bool SqueezeDetector::update(double force) {
  if (force > threshold_) {
    below_ = 0;
    ++streak_;
    if (streak_ >= min_samples_ && !fired_) {
      fired_ = true;
      ++events_;
      return true;
    }
    return false;
  }
  streak_ = 0;
  if (++below_ >= min_samples_) fired_ = false;
  return false;
}

MarbleNode::MarbleNode(msgbus::Bus& bus, std::string instance, std::string contact_device, BallModelParams params)
    : bus_(bus),
      instance_(std::move(instance)),
      params_(params),
      squeeze_(params.squeeze_threshold),
      radius_(params.r0) {
  const std::string node = "marble:" + instance_;
  const std::string app = "/app/" + instance_;
  inbox_ = bus_.subscribe(node, app + "/inbox", std::string(kInboxTag), 256);
  contact_ = bus_.subscribe(node, devices::device_topic(instance_, contact_device, devices::Channel::Sample),
                            std::string(devices::ContactSample::type_tag), 256);
  radius_pub_ = bus_.advertise(node, app + "/radius", std::string(kRadiusTag), {.latched = true});
  squeeze_pub_ = bus_.advertise(node, app + "/squeeze", std::string(kSqueezeTag));
}

std::shared_ptr<MarbleNode> MarbleNode::for_instance(runtime::Simulation& sim, const std::string& instance) {
  const auto* inst = sim.instances().find(instance);
  if (!inst) throw Error(Errc::BadConfig, "no instance " + instance);
  std::string contact;
  for (const auto& d : inst->model.devices) {
    if (d.kind == scene::DeviceKind::Contact) contact = d.id;
  }
  if (contact.empty()) throw Error(Errc::BadConfig, instance + " has no contact device");
  return std::make_shared<MarbleNode>(sim.bus(), instance, contact, BallModelParams::from(inst->model.params));
}

void MarbleNode::spin_once(Nanos now) {
  for (const auto& env : inbox_.drain()) {
    ++unread_;
    last_message_ = env.stamp;
  }
  for (const auto& env : contact_.drain()) {
    auto s = devices::decode<devices::ContactSample>(env.payload);
    double peak = 0.0;
    for (const auto& c : s.contacts) peak = std::max(peak, c.force);
    if (squeeze_.update(peak)) {
      wire::Writer w;
      w.u64(unread_);
      bus_.publish_at(squeeze_pub_, w.take(), now);
      unread_ = 0;
    }
  }
  double t = msgbus::nanos_to_seconds(now - last_message_.value_or(0));
  double r = ball_radius(unread_, t, params_);
  // Publish only changes worth a collision update.
  if (std::abs(r - radius_) > 1e-4) {
    radius_ = r;
    wire::Writer w;
    w.f64(r);
    bus_.publish_at(radius_pub_, w.take(), now);
  }
}

double decode_radius(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  double v = r.f64();
  if (!r.done() || !std::isfinite(v) || v <= 0.0) throw Error(Errc::BadMessage, "BallRadius");
  return v;
}

void install_marble_actuator(runtime::Simulation& sim, const std::string& instance, const std::string& link) {
  auto body = sim.instances().find(instance)->body(link);
  auto sub = std::make_shared<msgbus::Subscription>(
      sim.bus().subscribe(std::string(runtime::kSimNode), "/app/" + instance + "/radius", std::string(kRadiusTag), 16));
  sim.add_boundary_hook([sub, body](runtime::Simulation& s) {
    std::optional<double> latest;
    for (const auto& env : sub->drain()) {
      try {
        latest = decode_radius(env.payload);
      } catch (const Error&) {
      }
    }
    if (latest) s.world().set_sphere_radius(body, *latest);
  });
}

}  // namespace vtui::apps
