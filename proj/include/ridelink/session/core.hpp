#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ridelink/protocol/messages.hpp"
#include "ridelink/session/history.hpp"

namespace ridelink::session {

enum class DriveState { AwaitingLogin, DriveIdle, SessionActive, SessionEndedPending };

enum class Screen { Login, Dashboard, Session };

std::string_view to_string(DriveState s) noexcept;
std::string_view to_string(Screen s) noexcept;

struct ShowScreen {
  Screen screen;
  friend bool operator==(const ShowScreen&, const ShowScreen&) = default;
};
struct OpenDisengagementSurvey {
  protocol::DisengagementRequest request;
  friend bool operator==(const OpenDisengagementSurvey&, const OpenDisengagementSurvey&) = default;
};
struct OpenEventSurvey {
  std::uint32_t event_seq;
  friend bool operator==(const OpenEventSurvey&, const OpenEventSurvey&) = default;
};
struct ShowSessEnd {
  friend bool operator==(const ShowSessEnd&, const ShowSessEnd&) = default;
};
struct UpdateCounters {
  std::uint32_t disengagement_count;
  std::uint32_t event_count;
  friend bool operator==(const UpdateCounters&, const UpdateCounters&) = default;
};
struct ConnectionIndicator {
  bool connected;
  friend bool operator==(const ConnectionIndicator&, const ConnectionIndicator&) = default;
};

using UiDirective =
    std::variant<ShowScreen, OpenDisengagementSurvey, OpenEventSurvey, ShowSessEnd, UpdateCounters, ConnectionIndicator>;

std::string_view directive_name(const UiDirective& d) noexcept;

/// What one input produced: UI directives, messages for the vehicle, and
/// journal entries, each in emission order.
struct Effects {
  std::vector<UiDirective> directives;
  std::vector<protocol::Envelope> outbound;
  std::vector<HistoryEvent> journal;

  bool empty() const noexcept { return directives.empty() && outbound.empty() && journal.empty(); }
};

struct Session {
  std::uint32_t session_seq = 0;
  std::int64_t started_at_ms = 0;
  std::optional<std::int64_t> ended_at_ms;
  std::uint32_t disengagement_count = 0;
  std::uint32_t event_count = 0;
  std::uint32_t next_event_seq = 1;
};

struct Drive {
  std::uint32_t drive_seq = 0;
  std::string pilot_id;
  std::string copilot_id;
  std::int64_t started_at_ms = 0;
  std::vector<Session> sessions;
};

/// Partially filled event survey; any subset of fields may be present.
struct EventDraft {
  std::optional<protocol::ComfortRating> longitudinal_comfort;
  std::optional<protocol::ComfortRating> lateral_comfort;
  std::optional<protocol::SafetyDetail> detail;
  std::optional<std::string> additional_info;
  friend bool operator==(const EventDraft&, const EventDraft&) = default;
};

struct PendingEventSurvey {
  std::uint32_t event_seq = 0;
  EventDraft draft;
};

/// Things that happened before the core could act on them: a connection (and
/// possibly a disengagement or login request) before login, or a connection
/// while the previous session's drafts are still being resolved.
struct PreLoginFlags {
  bool connection_pending = false;
  std::optional<protocol::DisengagementRequest> disengagement_pending;
  bool login_request_pending = false;
  std::int64_t connected_at_ms = 0;
};

struct OpenDisengagement {
  protocol::DisengagementRequest request;
};
struct OpenEvent {
  std::uint32_t event_seq;
};
using OpenSurvey = std::variant<std::monostate, OpenDisengagement, OpenEvent>;

/// The co-pilot side state machine. Single-threaded: callers serialize all
/// inputs. Every input either applies completely and returns its Effects, or
/// throws ridelink::Error and leaves the state untouched.
class SessionCore {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit SessionCore(Clock clock = {}, History history = {});

  // Inputs from the UI.
  Effects initiate_drive(const std::string& pilot_id, const std::string& copilot_id);
  Effects submit_disengagement(const protocol::DisengagementSurvey& survey);
  protocol::DisengagementSurvey test_drive_autofill() const;
  Effects submit_test_drive();
  Effects trigger_event();
  Effects save_event_survey(std::uint32_t event_seq, const EventDraft& draft);
  std::pair<EventDraft, Effects> edit_event_survey(std::uint32_t event_seq);
  Effects discard_event_survey(std::uint32_t event_seq);
  Effects submit_event_survey(const protocol::EventSurvey& survey);
  Effects send_comfort_feedback(protocol::ComfortRating longitudinal, protocol::ComfortRating lateral);
  Effects end_drive();

  // Inputs from the transport.
  Effects on_peer_connected();
  Effects on_peer_disconnected();
  Effects on_message(const protocol::Envelope& msg);
  Effects on_login_request();
  Effects on_disengagement_request(const protocol::DisengagementRequest& req);
  Effects on_connection_status(bool connected);

  // Queries.
  DriveState state() const noexcept { return state_; }
  const std::optional<Drive>& drive() const noexcept { return drive_; }
  const Session* current_session() const noexcept;
  const PreLoginFlags& flags() const noexcept { return flags_; }
  const OpenSurvey& open_survey() const noexcept { return open_; }
  std::vector<PendingEventSurvey> pending_event_surveys() const;
  std::vector<std::uint32_t> pending_cards() const;
  bool indicator() const noexcept { return indicator_; }
  const History& history() const noexcept { return history_; }

  std::vector<SessionSummary> session_history() const { return history_.summaries(); }
  /// Resolves within the current drive, or the most recent one when no
  /// drive is active. Throws Error{UnknownSession}.
  SessionDetail session_detail(std::uint32_t session_seq) const;
  SessionDetail session_detail(std::uint32_t drive_seq, std::uint32_t session_seq) const;

 private:
  std::int64_t now() const { return clock_(); }
  Session& session();
  bool knows_event(std::uint32_t event_seq) const;
  void stash_open_event();
  void record(Effects& fx, HistoryEvent ev);
  void start_session(Effects& fx, std::int64_t at_ms);
  void apply_deferred(Effects& fx);
  void after_draft_resolved(Effects& fx);

  Clock clock_;
  History history_;
  DriveState state_ = DriveState::AwaitingLogin;
  std::optional<Drive> drive_;
  PreLoginFlags flags_;
  OpenSurvey open_;
  std::map<std::uint32_t, EventDraft> drafts_;
  bool indicator_ = false;
};

/// Validates whatever fields a draft carries. Throws Error{InvalidMessage}.
void validate(const EventDraft& draft);

}  // namespace ridelink::session
