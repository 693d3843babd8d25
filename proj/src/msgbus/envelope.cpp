#include "vtui/msgbus/envelope.hpp"

#include <vector>

namespace vtui::msgbus {

namespace {

std::vector<std::string_view> split_segments(std::string_view path) {
  std::vector<std::string_view> out;
  if (!path.empty() && path.front() == '/') path.remove_prefix(1);
  while (!path.empty()) {
    auto slash = path.find('/');
    out.push_back(path.substr(0, slash));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return out;
}

bool match_from(const std::vector<std::string_view>& pat, std::size_t pi,
                const std::vector<std::string_view>& top, std::size_t ti) {
  if (pi == pat.size()) return ti == top.size();
  if (pat[pi] == "**") {
    for (std::size_t k = ti; k <= top.size(); ++k) {
      if (match_from(pat, pi + 1, top, k)) return true;
    }
    return false;
  }
  if (ti == top.size()) return false;
  if (pat[pi] != "*" && pat[pi] != top[ti]) return false;
  return match_from(pat, pi + 1, top, ti + 1);
}

}  // namespace

bool valid_segment(std::string_view segment) {
  if (segment.empty()) return false;
  for (char c : segment) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

bool valid_topic_name(std::string_view topic) {
  if (topic.size() < 2 || topic.front() != '/' || topic.back() == '/') return false;
  topic.remove_prefix(1);
  while (true) {
    auto slash = topic.find('/');
    if (!valid_segment(topic.substr(0, slash))) return false;
    if (slash == std::string_view::npos) return true;
    topic.remove_prefix(slash + 1);
  }
}

bool topic_matches(std::string_view pattern, std::string_view topic) {
  return match_from(split_segments(pattern), 0, split_segments(topic), 0);
}

}  // namespace vtui::msgbus
