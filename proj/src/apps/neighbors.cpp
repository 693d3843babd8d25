#include "vtui/apps/neighbors.hpp"

#include "vtui/devices/messages.hpp"
#include "vtui/devices/topics.hpp"
#include "vtui/error.hpp"
#include "vtui/wire.hpp"

namespace vtui::apps {

bool NeighborTracker::update(const std::string& face, std::optional<double> distance) {
  auto& s = faces_[face];
  bool near = distance && *distance <= threshold_;
  if (near == s.adjacent) {
    s.streak = 0;
    return false;
  }
  if (++s.streak < debounce_) return false;
  s.adjacent = near;
  s.streak = 0;
  return true;
}

bool NeighborTracker::adjacent(const std::string& face) const {
  auto it = faces_.find(face);
  return it != faces_.end() && it->second.adjacent;
}

std::set<std::string> NeighborTracker::adjacent_faces() const {
  std::set<std::string> out;
  for (const auto& [k, s] : faces_) {
    if (s.adjacent) out.insert(k);
  }
  return out;
}

std::string face_key(const std::string& instance, const std::string& label) { return instance + "." + label; }

namespace {

std::pair<std::string, std::string> split_key(const std::string& key) {
  auto dot = key.rfind('.');
  return {key.substr(0, dot), key.substr(dot + 1)};
}

std::string opposite(const std::string& label) {
  std::string o = label;
  o[0] = label[0] == '+' ? '-' : '+';
  return o;
}

}  // namespace

Adjacency pair_faces(const std::set<std::string>& adjacent) {
  Adjacency out;
  for (const auto& a : adjacent) {
    auto [ia, la] = split_key(a);
    for (const auto& b : adjacent) {
      auto [ib, lb] = split_key(b);
      if (ia == ib || lb != opposite(la)) continue;
      out.insert(a < b ? std::pair{a, b} : std::pair{b, a});
    }
  }
  return out;
}

msgbus::Bytes encode(const Adjacency& a) {
  wire::Writer w;
  w.u32(static_cast<std::uint32_t>(a.size()));
  for (const auto& [x, y] : a) {
    w.str(x);
    w.str(y);
  }
  return w.take();
}

Adjacency decode_adjacency(std::span<const std::uint8_t> bytes) {
  wire::Reader r(bytes, Errc::BadMessage);
  Adjacency a;
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string x = r.str();
    a.emplace(std::move(x), r.str());
  }
  if (!r.done()) r.fail("trailing bytes");
  return a;
}

NeighborNode::NeighborNode(msgbus::Bus& bus, const std::vector<std::string>& instances, double threshold)
    : bus_(bus), tracker_(threshold) {
  const std::string node = "neighbors";
  for (const auto& inst : instances) {
    for (const char* s : {"px", "nx", "py", "ny"}) {
      std::string label = std::string(s[0] == 'p' ? "+" : "-") + s[1];
      inputs_.push_back({face_key(inst, label),
                         bus_.subscribe(node, devices::device_topic(inst, std::string("prox_") + s, devices::Channel::Sample),
                                        std::string(devices::ProximitySample::type_tag), 256)});
    }
  }
  out_ = bus_.advertise(node, "/app/neighbors", std::string(kAdjacencyTag), {.latched = true});
}

std::shared_ptr<NeighborNode> NeighborNode::for_instances(runtime::Simulation& sim,
                                                          const std::vector<std::string>& instances) {
  double threshold = 0.0;
  for (const auto& name : instances) {
    const auto* inst = sim.instances().find(name);
    if (!inst) throw Error(Errc::BadConfig, "no instance " + name);
    auto it = inst->model.params.find("neighbor_threshold");
    if (it == inst->model.params.end()) throw Error(Errc::BadConfig, name + " has no param.neighbor_threshold");
    threshold = it->second;
  }
  return std::make_shared<NeighborNode>(sim.bus(), instances, threshold);
}

void NeighborNode::spin_once(Nanos now) {
  bool changed = false;
  for (auto& in : inputs_) {
    for (const auto& env : in.sub.drain()) {
      changed |= tracker_.update(in.key, devices::decode<devices::ProximitySample>(env.payload).distance);
    }
  }
  if (!changed && published_) return;
  auto next = pair_faces(tracker_.adjacent_faces());
  if (published_ && next == adjacency_) return;
  adjacency_ = std::move(next);
  published_ = true;
  bus_.publish_at(out_, encode(adjacency_), now);
}

}  // namespace vtui::apps
