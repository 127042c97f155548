#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmapf {

enum class ErrorCode {
  ZeroDisplacement,
  NonFiniteInput,
  NonFiniteAction,
  EpisodeFinished,
  ActionArity,
  EmptyTrace,
  EmptyInput,
  PlacementExhausted,
  DegenerateMap,
  RaggedGrid,
  UnknownGlyph,
  HeaderMismatch,
  InvalidEndpoint,
  NoPathFound,
  InvalidArgument,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroDisplacement: return "ZeroDisplacement";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonFiniteAction: return "NonFiniteAction";
    case ErrorCode::EpisodeFinished: return "EpisodeFinished";
    case ErrorCode::ActionArity: return "ActionArity";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::PlacementExhausted: return "PlacementExhausted";
    case ErrorCode::DegenerateMap: return "DegenerateMap";
    case ErrorCode::RaggedGrid: return "RaggedGrid";
    case ErrorCode::UnknownGlyph: return "UnknownGlyph";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::InvalidEndpoint: return "InvalidEndpoint";
    case ErrorCode::NoPathFound: return "NoPathFound";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `code()` is stable; the message
/// carries context (agent/slot/episode index, key path, line:column).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error with "<context>: " prepended to the detail.
  Error with_context(const std::string& context) const {
    return Error(code_, context + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace cmapf
