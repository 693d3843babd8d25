#include "vtui/msgbus/bus.hpp"

#include <algorithm>
#include <deque>
#include <future>
#include <ostream>
#include <thread>

namespace vtui::msgbus {

namespace detail {

struct PublisherState {
  NodeId node;
  std::string topic;
  std::string type_tag;
  bool latched = false;
  bool revoked = false;  // guarded by Bus::mutex_
};

struct SubscriberQueue {
  NodeId node;
  std::string topic;
  std::size_t depth = kDefaultQueueDepth;

  mutable std::mutex mutex;
  std::deque<Envelope> items;
  std::uint64_t drops = 0;
  bool closed = false;

  void push(const Envelope& e) {
    std::lock_guard lock(mutex);
    if (closed) return;
    if (items.size() == depth) {
      items.pop_front();
      ++drops;
    }
    items.push_back(e);
  }
};

struct RecorderState {
  std::vector<std::string> patterns;
  std::ostream* sink = nullptr;
  std::vector<Envelope> records;
  bool active = true;

  bool matches(const std::string& topic) const {
    return std::any_of(patterns.begin(), patterns.end(), [&](const auto& p) { return topic_matches(p, topic); });
  }
};

struct TopicEntry {
  std::string type_tag;
  std::set<NodeId> publishers;
  std::map<NodeId, std::uint64_t> next_seq;
  std::map<NodeId, Nanos> last_stamp;
  std::vector<std::shared_ptr<SubscriberQueue>> subscribers;
  std::optional<Envelope> latched;
};

}  // namespace detail

// --- handles ---------------------------------------------------------------

const std::string& Publisher::topic() const { return state_->topic; }
const std::string& Publisher::type_tag() const { return state_->type_tag; }
const NodeId& Publisher::node() const { return state_->node; }
bool Publisher::revoked() const { return !state_ || state_->revoked; }

std::vector<Envelope> Subscription::drain() {
  std::lock_guard lock(queue_->mutex);
  std::vector<Envelope> out(std::make_move_iterator(queue_->items.begin()),
                            std::make_move_iterator(queue_->items.end()));
  queue_->items.clear();
  return out;
}

std::optional<Envelope> Subscription::pop() {
  std::lock_guard lock(queue_->mutex);
  if (queue_->items.empty()) return std::nullopt;
  Envelope e = std::move(queue_->items.front());
  queue_->items.pop_front();
  return e;
}

std::size_t Subscription::size() const {
  std::lock_guard lock(queue_->mutex);
  return queue_->items.size();
}

std::uint64_t Subscription::drops() const {
  std::lock_guard lock(queue_->mutex);
  return queue_->drops;
}

std::size_t Subscription::depth() const { return queue_->depth; }
const std::string& Subscription::topic() const { return queue_->topic; }
const NodeId& Subscription::node() const { return queue_->node; }

// --- bus -------------------------------------------------------------------

Bus::Bus() = default;
Bus::~Bus() = default;

detail::TopicEntry& Bus::entry_for(const std::string& topic, const std::string& type_tag) {
  if (!valid_topic_name(topic)) throw Error(Errc::BadTopicName, "'" + topic + "'");
  auto it = topics_.find(topic);
  if (it == topics_.end()) {
    auto entry = std::make_unique<detail::TopicEntry>();
    entry->type_tag = type_tag;
    it = topics_.emplace(topic, std::move(entry)).first;
  } else if (it->second->type_tag != type_tag) {
    throw Error(Errc::TypeTagConflict,
                topic + " is registered as " + it->second->type_tag + ", not " + type_tag);
  }
  return *it->second;
}

Publisher Bus::advertise(const NodeId& node, const std::string& topic, const std::string& type_tag,
                         AdvertiseOptions options) {
  std::lock_guard lock(mutex_);
  auto& entry = entry_for(topic, type_tag);
  entry.publishers.insert(node);
  auto state = std::make_shared<detail::PublisherState>();
  state->node = node;
  state->topic = topic;
  state->type_tag = type_tag;
  state->latched = options.latched;
  auto& owned = publishers_by_node_[node];
  std::erase_if(owned, [](const auto& w) { return w.expired(); });
  owned.push_back(state);
  return Publisher(std::move(state));
}

void Bus::declare(const std::string& topic, const std::string& type_tag) {
  std::lock_guard lock(mutex_);
  entry_for(topic, type_tag);
}

Subscription Bus::subscribe(const NodeId& node, const std::string& topic, const std::string& type_tag,
                            std::size_t queue_depth) {
  if (queue_depth < 1) throw Error(Errc::BadConfig, "queue_depth must be >= 1");
  std::lock_guard lock(mutex_);
  auto& entry = entry_for(topic, type_tag);
  auto q = std::make_shared<detail::SubscriberQueue>();
  q->node = node;
  q->topic = topic;
  q->depth = queue_depth;
  if (entry.latched) q->push(*entry.latched);
  entry.subscribers.push_back(q);
  return Subscription(std::move(q));
}

std::uint64_t Bus::publish(const Publisher& pub, std::span<const std::uint8_t> payload, const VirtualClock& clock) {
  return publish_at(pub, payload, clock.now());
}

std::uint64_t Bus::publish_at(const Publisher& pub, std::span<const std::uint8_t> payload, Nanos stamp) {
  if (!pub) throw Error(Errc::HandleRevoked, "empty publisher handle");
  std::lock_guard lock(mutex_);
  if (pub.state_->revoked) throw Error(Errc::HandleRevoked, pub.state_->node + " on " + pub.state_->topic);
  return deliver(*pub.state_, payload, stamp);
}

std::uint64_t Bus::deliver(detail::PublisherState& pub, std::span<const std::uint8_t> payload, Nanos stamp) {
  auto& entry = *topics_.at(pub.topic);
  auto& last = entry.last_stamp[pub.node];
  // Stamps never regress per publisher; a lagging clock is pinned forward.
  stamp = std::max(stamp, last);
  last = stamp;

  Envelope env{pub.topic, pub.type_tag, pub.node, entry.next_seq[pub.node]++, stamp,
               Bytes(payload.begin(), payload.end())};

  std::erase_if(entry.subscribers, [](const auto& q) {
    std::lock_guard ql(q->mutex);
    return q->closed;
  });
  for (auto& q : entry.subscribers) q->push(env);

  std::erase_if(recorders_, [](const auto& w) { return w.expired(); });
  for (auto& w : recorders_) {
    auto r = w.lock();
    if (r && r->active && r->matches(env.topic)) r->records.push_back(env);
  }
  if (pub.latched) entry.latched = env;
  ++published_;
  return env.seq;
}

void Bus::shutdown_node(const NodeId& node) {
  std::lock_guard lock(mutex_);
  if (auto it = publishers_by_node_.find(node); it != publishers_by_node_.end()) {
    for (auto& w : it->second) {
      if (auto p = w.lock()) p->revoked = true;
    }
    publishers_by_node_.erase(it);
  }
  for (auto& [name, entry] : topics_) {
    entry->publishers.erase(node);
    for (auto& q : entry->subscribers) {
      if (q->node == node) {
        std::lock_guard ql(q->mutex);
        q->closed = true;
      }
    }
  }
  std::erase_if(services_, [&](const auto& kv) { return kv.second.first == node; });
}

ServiceHandle Bus::register_service(const NodeId& node, const std::string& name, ServiceHandler handler) {
  std::lock_guard lock(mutex_);
  auto [it, inserted] =
      services_.emplace(name, std::make_pair(node, std::make_shared<ServiceHandler>(std::move(handler))));
  if (!inserted) throw Error(Errc::DuplicateService, name + " already served by " + it->second.first);
  return {name, node};
}

Bytes Bus::call_service(const std::string& name, std::span<const std::uint8_t> request,
                        std::chrono::nanoseconds timeout) {
  std::shared_ptr<ServiceHandler> handler;
  {
    std::lock_guard lock(mutex_);
    auto it = services_.find(name);
    if (it == services_.end()) throw Error(Errc::NoSuchService, name);
    handler = it->second.second;
  }
  if (timeout <= std::chrono::nanoseconds::zero()) return (*handler)(request);

  auto promise = std::make_shared<std::promise<Bytes>>();
  auto result = promise->get_future();
  std::thread([handler, promise, req = Bytes(request.begin(), request.end())] {
    try {
      promise->set_value((*handler)(req));
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();
  if (result.wait_for(timeout) != std::future_status::ready) throw Error(Errc::Timeout, name);
  return result.get();
}

Recorder Bus::record(const std::vector<std::string>& patterns, std::ostream* sink) {
  auto state = std::make_shared<detail::RecorderState>();
  state->patterns = patterns;
  state->sink = sink;
  std::lock_guard lock(mutex_);
  recorders_.push_back(state);
  return Recorder(std::move(state));
}

BagFile Bus::stop(Recorder& recorder) {
  if (!recorder) throw Error(Errc::HandleRevoked, "recorder already stopped");
  BagFile bag;
  std::ostream* sink = recorder.state_->sink;
  {
    std::lock_guard lock(mutex_);
    auto& st = *recorder.state_;
    st.active = false;
    for (const auto& [topic, entry] : topics_) {
      if (st.matches(topic)) bag.topics.emplace(topic, entry->type_tag);
    }
    bag.records = std::move(st.records);
  }
  sort_records(bag.records);
  if (!bag.records.empty()) {
    bag.start = bag.records.front().stamp;
    bag.duration = bag.records.back().stamp - bag.start;
  }
  recorder.state_.reset();
  if (sink) {
    auto bytes = serialize_bag(bag);
    sink->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    sink->flush();
    if (!*sink) throw Error(Errc::SinkWriteError, "bag sink rejected write");
  }
  return bag;
}

std::optional<std::string> Bus::type_tag(const std::string& topic) const {
  std::lock_guard lock(mutex_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) return std::nullopt;
  return it->second->type_tag;
}

std::vector<TopicInfo> Bus::topics() const {
  std::lock_guard lock(mutex_);
  std::vector<TopicInfo> out;
  for (const auto& [name, entry] : topics_) {
    TopicInfo info{name, entry->type_tag, entry->publishers, {}};
    for (const auto& q : entry->subscribers) {
      std::lock_guard ql(q->mutex);
      if (!q->closed) info.subscribers.push_back({q->node, q->depth, q->drops});
    }
    out.push_back(std::move(info));
  }
  return out;
}

std::uint64_t Bus::messages_published() const {
  std::lock_guard lock(mutex_);
  return published_;
}

}  // namespace vtui::msgbus
