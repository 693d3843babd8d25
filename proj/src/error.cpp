#include "vtui/error.hpp"

namespace vtui {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::TypeTagConflict: return "TypeTagConflict";
    case Errc::BadTopicName: return "BadTopicName";
    case Errc::HandleRevoked: return "HandleRevoked";
    case Errc::NoSuchService: return "NoSuchService";
    case Errc::DuplicateService: return "DuplicateService";
    case Errc::Timeout: return "Timeout";
    case Errc::SinkWriteError: return "SinkWriteError";
    case Errc::BagCorrupt: return "BagCorrupt";
    case Errc::BadMessage: return "BadMessage";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownField: return "UnknownField";
    case Errc::BadUnit: return "BadUnit";
    case Errc::ZeroMass: return "ZeroMass";
    case Errc::NameCollision: return "NameCollision";
    case Errc::ValidationFailed: return "ValidationFailed";
    case Errc::NumericalDivergence: return "NumericalDivergence";
    case Errc::NoSuchBody: return "NoSuchBody";
    case Errc::StaticBody: return "StaticBody";
    case Errc::NoSuchDevice: return "NoSuchDevice";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BatteryDepleted: return "BatteryDepleted";
    case Errc::OffSurface: return "OffSurface";
    case Errc::AlreadyBound: return "AlreadyBound";
    case Errc::RateMismatch: return "RateMismatch";
    case Errc::SceneError: return "SceneError";
    case Errc::BadConfig: return "BadConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace vtui
