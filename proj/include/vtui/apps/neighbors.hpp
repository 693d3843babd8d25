#pragma once

// Sifteo-style neighbour detection from per-face proximity sensors.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vtui/msgbus/bus.hpp"
#include "vtui/runtime/simulation.hpp"

namespace vtui::apps {

using msgbus::Nanos;

inline constexpr int kNeighborDebounce = 3;

/// Per-face debounce: a face flips state only after `debounce` consecutive
/// samples on the other side of the threshold.
class NeighborTracker {
 public:
  explicit NeighborTracker(double threshold, int debounce = kNeighborDebounce)
      : threshold_(threshold), debounce_(debounce) {}

  /// Returns true if the face's adjacency changed.
  bool update(const std::string& face, std::optional<double> distance);
  bool adjacent(const std::string& face) const;
  std::set<std::string> adjacent_faces() const;
  double threshold() const { return threshold_; }

 private:
  struct FaceState {
    bool adjacent = false;
    int streak = 0;
  };
  double threshold_;
  int debounce_;
  std::map<std::string, FaceState> faces_;
};

/// Face key "<instance>.<label>" with labels +x, -x, +y, -y.
std::string face_key(const std::string& instance, const std::string& label);

using Adjacency = std::set<std::pair<std::string, std::string>>;

/// Pairs adjacent faces of different cubes whose labels are opposite
/// (c1.+x with c2.-x). Each pair is ordered (lower key first).
Adjacency pair_faces(const std::set<std::string>& adjacent_faces);

inline constexpr std::string_view kAdjacencyTag = "Adjacency";
msgbus::Bytes encode(const Adjacency& a);
Adjacency decode_adjacency(std::span<const std::uint8_t> bytes);

/// Subscribes to every prox_<px|nx|py|ny> sample of the given instances and
/// publishes /app/neighbors when the paired adjacency set changes.
class NeighborNode : public runtime::Node {
 public:
  NeighborNode(msgbus::Bus& bus, const std::vector<std::string>& instances, double threshold);
  static std::shared_ptr<NeighborNode> for_instances(runtime::Simulation& sim, const std::vector<std::string>& instances);

  void spin_once(Nanos now) override;
  const Adjacency& adjacency() const { return adjacency_; }
  const NeighborTracker& tracker() const { return tracker_; }

 private:
  struct Input {
    std::string key;
    msgbus::Subscription sub;
  };
  msgbus::Bus& bus_;
  NeighborTracker tracker_;
  std::vector<Input> inputs_;
  msgbus::Publisher out_;
  Adjacency adjacency_;
  bool published_ = false;
};

}  // namespace vtui::apps
