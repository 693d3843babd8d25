#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vtui/scene/types.hpp"

namespace vtui::devices {

enum class Channel { Sample, Frame, Touch, Battery, Cmd };

std::string_view to_string(Channel c);

/// `/tui/<instance>/<device>/<channel>`
std::string device_topic(std::string_view instance, std::string_view device, Channel channel);

/// Every (topic, type_tag) a device or display of this kind owns.
std::vector<std::pair<std::string, std::string>> device_topics(std::string_view instance,
                                                               const scene::DeviceDescriptor& d);
std::vector<std::pair<std::string, std::string>> display_topics(std::string_view instance,
                                                                const scene::DisplaySpec& d);

/// type_tag of the kind's sample/battery stream.
std::string_view sample_type_tag(scene::DeviceKind kind);

}  // namespace vtui::devices
