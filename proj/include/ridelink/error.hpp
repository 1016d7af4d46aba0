#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ridelink {

/// Every failure the suite reports is one of these codes. The wire name
/// (`errc_name`) is what the HTTP API and transcripts carry.
enum class Errc {
  // codec / framing
  MalformedFrame,
  UnknownKind,
  InvalidMessage,
  StreamClosed,
  FrameTooLarge,
  // transport
  BindFailed,
  InvalidConfig,
  QueueFull,
  // session core
  EmptyField,
  WrongState,
  ProtocolViolation,
  SequenceMismatch,
  NoOpenSurvey,
  SurveyOpen,
  NotInSession,
  UnknownEvent,
  NotIdle,
  UnknownSession,
  // emulator / service
  OrphanEventSurvey,
  ScenarioParseError,
  ExpectationFailed,
  CorruptJournal,
  BadRequest,
  NotFound,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  explicit Error(Errc code) : std::runtime_error(std::string(errc_name(code))), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ridelink
