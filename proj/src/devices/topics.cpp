#include "vtui/devices/topics.hpp"

#include "vtui/devices/messages.hpp"

namespace vtui::devices {

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::Sample: return "sample";
    case Channel::Frame: return "frame";
    case Channel::Touch: return "touch";
    case Channel::Battery: return "battery";
    case Channel::Cmd: return "cmd";
  }
  return "?";
}

std::string device_topic(std::string_view instance, std::string_view device, Channel channel) {
  std::string t = "/tui/";
  t += instance;
  t += '/';
  t += device;
  t += '/';
  t += to_string(channel);
  return t;
}

std::string_view sample_type_tag(scene::DeviceKind kind) {
  using K = scene::DeviceKind;
  switch (kind) {
    case K::Accelerometer: return AccelSample::type_tag;
    case K::Proximity: return ProximitySample::type_tag;
    case K::Contact: return ContactSample::type_tag;
    case K::Battery: return BatteryState::type_tag;
    case K::Display: return DisplayFrame::type_tag;
    case K::Touchscreen: return TouchEvent::type_tag;
  }
  return {};
}

std::vector<std::pair<std::string, std::string>> device_topics(std::string_view instance,
                                                               const scene::DeviceDescriptor& d) {
  if (d.kind == scene::DeviceKind::Battery) {
    return {{device_topic(instance, d.id, Channel::Battery), std::string(BatteryState::type_tag)},
            {device_topic(instance, d.id, Channel::Cmd), std::string(BatteryCommand::type_tag)}};
  }
  return {{device_topic(instance, d.id, Channel::Sample), std::string(sample_type_tag(d.kind))}};
}

std::vector<std::pair<std::string, std::string>> display_topics(std::string_view instance,
                                                                const scene::DisplaySpec& d) {
  std::vector<std::pair<std::string, std::string>> out{
      {device_topic(instance, d.id, Channel::Frame), std::string(DisplayFrame::type_tag)},
      {device_topic(instance, d.id, Channel::Cmd), std::string(DisplayFrame::type_tag)}};
  if (d.touch) out.emplace_back(device_topic(instance, d.id, Channel::Touch), std::string(TouchEvent::type_tag));
  return out;
}

}  // namespace vtui::devices
