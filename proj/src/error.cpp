#include "ridelink/error.hpp"

namespace ridelink {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedFrame: return "MALFORMED_FRAME";
    case Errc::UnknownKind: return "UNKNOWN_KIND";
    case Errc::InvalidMessage: return "INVALID_MESSAGE";
    case Errc::StreamClosed: return "STREAM_CLOSED";
    case Errc::FrameTooLarge: return "FRAME_TOO_LARGE";
    case Errc::BindFailed: return "BIND_FAILED";
    case Errc::InvalidConfig: return "INVALID_CONFIG";
    case Errc::QueueFull: return "QUEUE_FULL";
    case Errc::EmptyField: return "EMPTY_FIELD";
    case Errc::WrongState: return "WRONG_STATE";
    case Errc::ProtocolViolation: return "PROTOCOL_VIOLATION";
    case Errc::SequenceMismatch: return "SEQUENCE_MISMATCH";
    case Errc::NoOpenSurvey: return "NO_OPEN_SURVEY";
    case Errc::SurveyOpen: return "SURVEY_OPEN";
    case Errc::NotInSession: return "NOT_IN_SESSION";
    case Errc::UnknownEvent: return "UNKNOWN_EVENT";
    case Errc::NotIdle: return "NOT_IDLE";
    case Errc::UnknownSession: return "UNKNOWN_SESSION";
    case Errc::OrphanEventSurvey: return "ORPHAN_EVENT_SURVEY";
    case Errc::ScenarioParseError: return "SCENARIO_PARSE_ERROR";
    case Errc::ExpectationFailed: return "EXPECTATION_FAILED";
    case Errc::CorruptJournal: return "CORRUPT_JOURNAL";
    case Errc::BadRequest: return "BAD_REQUEST";
    case Errc::NotFound: return "NOT_FOUND";
  }
  return "UNKNOWN";
}

}  // namespace ridelink
