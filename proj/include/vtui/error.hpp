#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vtui {

/// Error kinds surfaced by every module. Each maps to one documented failure
/// of an operation; callers switch on code() rather than parsing messages.
enum class Errc {
  // msgbus
  TypeTagConflict,
  BadTopicName,
  HandleRevoked,
  NoSuchService,
  DuplicateService,
  Timeout,
  SinkWriteError,
  BagCorrupt,
  /// Payload does not decode as its type_tag.
  BadMessage,
  // scene
  SyntaxError,
  UnknownField,
  BadUnit,
  ZeroMass,
  NameCollision,
  ValidationFailed,
  // physics
  NumericalDivergence,
  NoSuchBody,
  StaticBody,
  // devices
  NoSuchDevice,
  DimensionMismatch,
  BatteryDepleted,
  OffSurface,
  AlreadyBound,
  RateMismatch,
  // runtime
  SceneError,
  BadConfig,
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace vtui
