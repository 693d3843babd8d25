#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "vtui/msgbus/clock.hpp"
#include "vtui/wire.hpp"

namespace vtui::msgbus {

using NodeId = std::string;
using Bytes = wire::Bytes;

struct Envelope {
  std::string topic;
  std::string type_tag;
  NodeId publisher;
  std::uint64_t seq = 0;
  Nanos stamp = 0;
  Bytes payload;

  bool operator==(const Envelope&) const = default;
};

/// `/[a-z0-9_]+(/[a-z0-9_]+)*`
bool valid_topic_name(std::string_view topic);

/// True for a single path segment usable inside a topic name.
bool valid_segment(std::string_view segment);

/// Topic patterns: a literal topic, where a `*` segment matches exactly one
/// segment and a `**` segment matches zero or more segments.
bool topic_matches(std::string_view pattern, std::string_view topic);

}  // namespace vtui::msgbus
