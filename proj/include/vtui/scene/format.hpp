#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "vtui/error.hpp"
#include "vtui/scene/types.hpp"

namespace vtui::scene {

inline constexpr int kSceneFormatVersion = 1;

/// Error located in `.scene` text. line/column are 1-based.
class ParseError : public Error {
 public:
  ParseError(Errc code, int line, int column, const std::string& detail)
      : Error(code, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + detail),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Text to SceneSpec without semantic checks. Throws ParseError with
/// SyntaxError, UnknownField or BadUnit.
SceneSpec parse_scene_unchecked(std::string_view text);

/// parse_scene_unchecked followed by validate(); any diagnostic becomes a
/// ValidationFailed error listing all of them.
SceneSpec parse_scene(std::string_view text);

SceneSpec load_scene_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Canonical text form; parse_scene_unchecked(serialize_scene(s)) == s.
std::string serialize_scene(const SceneSpec& spec);

}  // namespace vtui::scene
