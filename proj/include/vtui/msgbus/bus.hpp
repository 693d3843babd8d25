#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vtui/msgbus/bag.hpp"
#include "vtui/msgbus/clock.hpp"
#include "vtui/msgbus/envelope.hpp"

namespace vtui::msgbus {

inline constexpr std::size_t kDefaultQueueDepth = 64;

namespace detail {
struct PublisherState;
struct SubscriberQueue;
struct RecorderState;
struct TopicEntry;
}  // namespace detail

class Publisher {
 public:
  Publisher() = default;

  const std::string& topic() const;
  const std::string& type_tag() const;
  const NodeId& node() const;
  bool revoked() const;
  explicit operator bool() const { return state_ != nullptr; }

 private:
  friend class Bus;
  explicit Publisher(std::shared_ptr<detail::PublisherState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::PublisherState> state_;
};

/// Bounded FIFO filled by the bus. Overflow drops the oldest envelope.
class Subscription {
 public:
  Subscription() = default;

  std::vector<Envelope> drain();
  std::optional<Envelope> pop();
  std::size_t size() const;
  std::uint64_t drops() const;
  std::size_t depth() const;
  const std::string& topic() const;
  const NodeId& node() const;
  explicit operator bool() const { return queue_ != nullptr; }

 private:
  friend class Bus;
  explicit Subscription(std::shared_ptr<detail::SubscriberQueue> q) : queue_(std::move(q)) {}
  std::shared_ptr<detail::SubscriberQueue> queue_;
};

class Recorder {
 public:
  Recorder() = default;
  explicit operator bool() const { return state_ != nullptr; }

 private:
  friend class Bus;
  explicit Recorder(std::shared_ptr<detail::RecorderState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::RecorderState> state_;
};

struct ServiceHandle {
  std::string name;
  NodeId node;
};

struct AdvertiseOptions {
  /// Retain the last envelope and hand it to late subscribers.
  bool latched = false;
};

struct SubscriptionInfo {
  NodeId node;
  std::size_t depth = 0;
  std::uint64_t drops = 0;
};

struct TopicInfo {
  std::string topic;
  std::string type_tag;
  std::set<NodeId> publishers;
  std::vector<SubscriptionInfo> subscribers;
};

/// In-process publish/subscribe fabric. Every public member is safe to call
/// concurrently; publish delivers into all subscriber queues before it
/// returns, so per-(publisher, topic) order is the order of publish calls.
class Bus {
 public:
  using ServiceHandler = std::function<Bytes(std::span<const std::uint8_t>)>;

  Bus();
  ~Bus();
  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  Publisher advertise(const NodeId& node, const std::string& topic, const std::string& type_tag,
                      AdvertiseOptions options = {});

  /// Fixes a topic's type_tag without creating a publisher.
  void declare(const std::string& topic, const std::string& type_tag);

  Subscription subscribe(const NodeId& node, const std::string& topic, const std::string& type_tag,
                         std::size_t queue_depth = kDefaultQueueDepth);

  std::uint64_t publish(const Publisher& pub, std::span<const std::uint8_t> payload, const VirtualClock& clock);
  std::uint64_t publish_at(const Publisher& pub, std::span<const std::uint8_t> payload, Nanos stamp);

  /// Revokes the node's publishers, closes its subscriptions and removes its services.
  void shutdown_node(const NodeId& node);

  ServiceHandle register_service(const NodeId& node, const std::string& name, ServiceHandler handler);
  /// A zero timeout runs the handler inline on the caller; otherwise the call
  /// gives up with Timeout once the deadline passes.
  Bytes call_service(const std::string& name, std::span<const std::uint8_t> request,
                     std::chrono::nanoseconds timeout = std::chrono::nanoseconds::zero());

  Recorder record(const std::vector<std::string>& patterns, std::ostream* sink = nullptr);
  /// Ends the recording, writes the bag to the sink given at record() (if any)
  /// and returns it.
  BagFile stop(Recorder& recorder);

  std::optional<std::string> type_tag(const std::string& topic) const;
  std::vector<TopicInfo> topics() const;
  std::uint64_t messages_published() const;

 private:
  detail::TopicEntry& entry_for(const std::string& topic, const std::string& type_tag);
  std::uint64_t deliver(detail::PublisherState& pub, std::span<const std::uint8_t> payload, Nanos stamp);

  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<detail::TopicEntry>> topics_;
  std::map<std::string, std::pair<NodeId, std::shared_ptr<ServiceHandler>>> services_;
  std::map<NodeId, std::vector<std::weak_ptr<detail::PublisherState>>> publishers_by_node_;
  std::vector<std::weak_ptr<detail::RecorderState>> recorders_;
  std::uint64_t published_ = 0;
};

}  // namespace vtui::msgbus
