#pragma once

// Marble answering machine: a ball that grows with unread messages and is
// squeezed to read them.

#include <map>
#include <optional>
#include <string>

#include "vtui/msgbus/bus.hpp"
#include "vtui/runtime/simulation.hpp"

namespace vtui::apps {

using msgbus::Nanos;

struct BallModelParams {
  double r0 = 0.05;
  double growth = 0.1;
  double tau = 30.0;
  double r_min = 0.03;
  double r_max = 0.1;
  double squeeze_threshold = 5.0;

  /// Reads param.<field> keys; missing keys keep the defaults. Throws BadConfig
  /// unless r_min ≤ r0 ≤ r_max and tau > 0.
  static BallModelParams from(const std::map<std::string, double>& params);
};

/// clamp(r0·(1 + growth·log2(1+n))·exp(−t/τ), r_min, r_max)
double ball_radius(std::uint64_t n_messages, double t_since_last, const BallModelParams& p);

inline constexpr int kSqueezeSamples = 3;

/// One event per episode of force > threshold lasting ≥ 3 consecutive samples.
/// An episode ends after 3 consecutive samples at or below the threshold.
class SqueezeDetector {
 public:
  explicit SqueezeDetector(double threshold, int min_samples = kSqueezeSamples)
      : threshold_(threshold), min_samples_(min_samples) {}

  /// Returns true exactly once per qualifying episode.
  bool update(double force);
  std::uint64_t events() const { return events_; }

 private:
  double threshold_;
  int min_samples_;
  int streak_ = 0;
  int below_ = 0;
  bool fired_ = false;
  std::uint64_t events_ = 0;
};

inline constexpr std::string_view kRadiusTag = "BallRadius";
inline constexpr std::string_view kSqueezeTag = "Squeeze";
inline constexpr std::string_view kInboxTag = "InboxMessage";

/// Inputs: /app/<inst>/inbox (any payload counts as one message) and the
/// contact device's samples. Outputs: /app/<inst>/radius (f64 m) and
/// /app/<inst>/squeeze (u64 unread count at the squeeze). A squeeze marks
/// every message read.
class MarbleNode : public runtime::Node {
 public:
  MarbleNode(msgbus::Bus& bus, std::string instance, std::string contact_device, BallModelParams params);
  static std::shared_ptr<MarbleNode> for_instance(runtime::Simulation& sim, const std::string& instance);

  void spin_once(Nanos now) override;
  std::uint64_t unread() const { return unread_; }
  double radius() const { return radius_; }
  const SqueezeDetector& squeeze() const { return squeeze_; }

 private:
  msgbus::Bus& bus_;
  std::string instance_;
  BallModelParams params_;
  msgbus::Subscription inbox_;
  msgbus::Subscription contact_;
  msgbus::Publisher radius_pub_;
  msgbus::Publisher squeeze_pub_;
  SqueezeDetector squeeze_;
  std::uint64_t unread_ = 0;
  std::optional<Nanos> last_message_;
  double radius_;
};

/// Simulation-side actuator: applies /app/<inst>/radius to the ball's
/// collision sphere at step boundaries.
void install_marble_actuator(runtime::Simulation& sim, const std::string& instance, const std::string& link);

double decode_radius(std::span<const std::uint8_t> bytes);

}  // namespace vtui::apps
