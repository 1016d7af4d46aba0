#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ridelink/protocol/messages.hpp"

namespace ridelink::session {

// Journal vocabulary. The core emits these as it runs; folding them through
// History rebuilds the drive history, which is how both the live service and
// a restarted one answer history queries.

struct DriveStarted {
  std::uint32_t drive_seq = 0;
  std::string pilot_id;
  std::string copilot_id;
  std::int64_t at_ms = 0;
  friend bool operator==(const DriveStarted&, const DriveStarted&) = default;
};

struct DriveEnded {
  std::uint32_t drive_seq = 0;
  std::int64_t at_ms = 0;
  friend bool operator==(const DriveEnded&, const DriveEnded&) = default;
};

struct SessionStarted {
  std::uint32_t drive_seq = 0;
  std::uint32_t session_seq = 0;
  std::int64_t at_ms = 0;
  friend bool operator==(const SessionStarted&, const SessionStarted&) = default;
};

struct SessionEnded {
  std::uint32_t drive_seq = 0;
  std::uint32_t session_seq = 0;
  std::int64_t at_ms = 0;
  friend bool operator==(const SessionEnded&, const SessionEnded&) = default;
};

struct EventFlagged {
  std::uint32_t drive_seq = 0;
  std::uint32_t session_seq = 0;
  std::uint32_t event_seq = 0;
  std::int64_t at_ms = 0;
  friend bool operator==(const EventFlagged&, const EventFlagged&) = default;
};

struct DisengagementSubmitted {
  std::uint32_t drive_seq = 0;
  std::uint32_t session_seq = 0;
  protocol::DisengagementSurvey survey;
  std::int64_t at_ms = 0;
  friend bool operator==(const DisengagementSubmitted&, const DisengagementSubmitted&) = default;
};

struct EventSurveySubmitted {
  std::uint32_t drive_seq = 0;
  std::uint32_t session_seq = 0;
  protocol::EventSurvey survey;
  std::int64_t at_ms = 0;
  friend bool operator==(const EventSurveySubmitted&, const EventSurveySubmitted&) = default;
};

using HistoryEvent = std::variant<DriveStarted, DriveEnded, SessionStarted, SessionEnded, EventFlagged,
                                  DisengagementSubmitted, EventSurveySubmitted>;

struct SessionSummary {
  std::uint32_t drive_seq = 0;
  std::uint32_t session_seq = 0;
  std::string pilot_id;
  std::uint32_t disengagement_count = 0;
  friend bool operator==(const SessionSummary&, const SessionSummary&) = default;
};

struct SessionDetail {
  std::uint32_t drive_seq = 0;
  std::uint32_t session_seq = 0;
  std::string pilot_id;
  std::string copilot_id;
  std::uint32_t disengagement_count = 0;
  std::uint32_t event_count = 0;
  std::int64_t started_at_ms = 0;
  std::int64_t ended_at_ms = 0;

  std::int64_t duration_ms() const noexcept { return ended_at_ms - started_at_ms; }
  SessionSummary summary() const { return {drive_seq, session_seq, pilot_id, disengagement_count}; }
  friend bool operator==(const SessionDetail&, const SessionDetail&) = default;
};

/// Completed sessions across all drives, in completion order.
class History {
 public:
  void apply(const HistoryEvent& ev);

  std::vector<SessionSummary> summaries() const;
  const std::vector<SessionDetail>& sessions() const noexcept { return ended_; }

  /// Throws Error{UnknownSession}.
  const SessionDetail& detail(std::uint32_t drive_seq, std::uint32_t session_seq) const;

  std::uint32_t last_drive_seq() const noexcept { return last_drive_seq_; }

 private:
  struct Crew {
    std::string pilot_id;
    std::string copilot_id;
  };
  using Key = std::pair<std::uint32_t, std::uint32_t>;

  std::map<std::uint32_t, Crew> drives_;
  std::map<Key, SessionDetail> open_;
  std::vector<SessionDetail> ended_;
  std::uint32_t last_drive_seq_ = 0;
};

}  // namespace ridelink::session
