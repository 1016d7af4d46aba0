#include "ridelink/session/core.hpp"

#include <algorithm>

#include "ridelink/clock.hpp"
#include "ridelink/error.hpp"

namespace ridelink::session {
namespace {

using protocol::DisengagementRequest;

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

[[noreturn]] void violation(const std::string& what) { throw Error(Errc::ProtocolViolation, what); }

}  // namespace

std::string_view to_string(DriveState s) noexcept {
  switch (s) {
    case DriveState::AwaitingLogin: return "AwaitingLogin";
    case DriveState::DriveIdle: return "DriveIdle";
    case DriveState::SessionActive: return "SessionActive";
    case DriveState::SessionEndedPending: return "SessionEndedPending";
  }
  return "?";
}

std::string_view to_string(Screen s) noexcept {
  switch (s) {
    case Screen::Login: return "Login";
    case Screen::Dashboard: return "Dashboard";
    case Screen::Session: return "Session";
  }
  return "?";
}

std::string_view directive_name(const UiDirective& d) noexcept {
  constexpr std::string_view names[] = {"ShowScreen",  "OpenDisengagementSurvey", "OpenEventSurvey",
                                        "ShowSessEnd", "UpdateCounters",          "ConnectionIndicator"};
  return names[d.index()];
}

void validate(const EventDraft& draft) {
  auto check = [](const std::optional<protocol::ComfortRating>& r) {
    if (r && !r->valid()) throw Error(Errc::InvalidMessage, "comfort rating out of range 0..5");
  };
  check(draft.longitudinal_comfort);
  check(draft.lateral_comfort);
  if (draft.detail) protocol::validate(*draft.detail);
  if (draft.additional_info && !protocol::is_valid_utf8(*draft.additional_info)) {
    throw Error(Errc::InvalidMessage, "additional_info is not valid UTF-8");
  }
}

SessionCore::SessionCore(Clock clock, History history)
    : clock_(clock ? std::move(clock) : Clock(&wall_ms)), history_(std::move(history)) {}

const Session* SessionCore::current_session() const noexcept {
  if (!drive_ || drive_->sessions.empty()) return nullptr;
  if (state_ != DriveState::SessionActive && state_ != DriveState::SessionEndedPending) return nullptr;
  return &drive_->sessions.back();
}

Session& SessionCore::session() { return drive_->sessions.back(); }

std::vector<PendingEventSurvey> SessionCore::pending_event_surveys() const {
  std::vector<PendingEventSurvey> out;
  for (const auto& [seq, draft] : drafts_) out.push_back({seq, draft});
  return out;
}

std::vector<std::uint32_t> SessionCore::pending_cards() const {
  std::vector<std::uint32_t> out;
  for (const auto& kv : drafts_) out.push_back(kv.first);
  return out;
}

SessionDetail SessionCore::session_detail(std::uint32_t session_seq) const {
  const auto drive_seq = drive_ ? drive_->drive_seq : history_.last_drive_seq();
  return history_.detail(drive_seq, session_seq);
}

SessionDetail SessionCore::session_detail(std::uint32_t drive_seq, std::uint32_t session_seq) const {
  return history_.detail(drive_seq, session_seq);
}

bool SessionCore::knows_event(std::uint32_t event_seq) const {
  if (drafts_.contains(event_seq)) return true;
  const auto* ev = std::get_if<OpenEvent>(&open_);
  return ev && ev->event_seq == event_seq;
}

// An event survey that is open but was never saved becomes an empty draft
// card, so it is never lost when something else takes the screen.
void SessionCore::stash_open_event() {
  if (const auto* ev = std::get_if<OpenEvent>(&open_)) {
    drafts_.try_emplace(ev->event_seq);
    open_ = std::monostate{};
  }
}

void SessionCore::record(Effects& fx, HistoryEvent ev) {
  history_.apply(ev);
  fx.journal.push_back(std::move(ev));
}

void SessionCore::start_session(Effects& fx, std::int64_t at_ms) {
  Session s;
  s.session_seq = static_cast<std::uint32_t>(drive_->sessions.size() + 1);
  s.started_at_ms = at_ms;
  drive_->sessions.push_back(s);
  state_ = DriveState::SessionActive;
  record(fx, SessionStarted{drive_->drive_seq, s.session_seq, at_ms});
}

// Starts the session whose connection arrived while the core could not take
// it, replaying the login and disengagement requests that came with it.
void SessionCore::apply_deferred(Effects& fx) {
  const auto flags = std::exchange(flags_, {});
  start_session(fx, flags.connected_at_ms);
  if (flags.login_request_pending) {
    fx.outbound.push_back(protocol::LoginSurvey{drive_->pilot_id, drive_->copilot_id});
  }
  if (flags.disengagement_pending) {
    open_ = OpenDisengagement{*flags.disengagement_pending};
    fx.directives.push_back(OpenDisengagementSurvey{*flags.disengagement_pending});
  }
  fx.directives.push_back(ShowScreen{Screen::Session});
}

void SessionCore::after_draft_resolved(Effects& fx) {
  if (state_ == DriveState::SessionEndedPending) {
    if (!drafts_.empty() || !std::holds_alternative<std::monostate>(open_)) {
      fx.directives.push_back(ShowSessEnd{});
      return;
    }
    state_ = DriveState::DriveIdle;
    fx.directives.push_back(ShowScreen{Screen::Dashboard});
    if (flags_.connection_pending) {
      apply_deferred(fx);
      fx.directives.push_back(UpdateCounters{0, 0});
    }
    return;
  }
  fx.directives.push_back(ShowScreen{Screen::Session});
}

Effects SessionCore::initiate_drive(const std::string& pilot_id, const std::string& copilot_id) {
  if (state_ != DriveState::AwaitingLogin) throw Error(Errc::WrongState, "a drive is already in progress");
  if (blank(pilot_id)) throw Error(Errc::EmptyField, "pilot_id");
  if (blank(copilot_id)) throw Error(Errc::EmptyField, "copilot_id");
  protocol::validate(protocol::LoginSurvey{pilot_id, copilot_id});

  Effects fx;
  const auto at = now();
  drive_ = Drive{history_.last_drive_seq() + 1, pilot_id, copilot_id, at, {}};
  record(fx, DriveStarted{drive_->drive_seq, pilot_id, copilot_id, at});

  if (flags_.connection_pending) {
    apply_deferred(fx);
  } else {
    flags_ = {};
    state_ = DriveState::DriveIdle;
    fx.directives.push_back(ShowScreen{Screen::Dashboard});
  }
  return fx;
}

Effects SessionCore::on_peer_connected() {
  Effects fx;
  switch (state_) {
    case DriveState::AwaitingLogin:
    case DriveState::SessionEndedPending:
      if (flags_.connection_pending) violation("duplicate PeerConnected");
      flags_.connection_pending = true;
      flags_.connected_at_ms = now();
      break;
    case DriveState::DriveIdle:
      start_session(fx, now());
      fx.directives.push_back(ShowScreen{Screen::Session});
      fx.directives.push_back(UpdateCounters{0, 0});
      break;
    case DriveState::SessionActive:
      violation("PeerConnected while a session is active");
  }
  return fx;
}

Effects SessionCore::on_peer_disconnected() {
  Effects fx;
  switch (state_) {
    case DriveState::AwaitingLogin:
    case DriveState::SessionEndedPending:
      flags_ = {};
      break;
    case DriveState::DriveIdle:
      break;
    case DriveState::SessionActive: {
      stash_open_event();
      open_ = std::monostate{};
      const auto at = std::max(now(), session().started_at_ms);
      session().ended_at_ms = at;
      record(fx, SessionEnded{drive_->drive_seq, session().session_seq, at});
      flags_ = {};
      if (drafts_.empty()) {
        state_ = DriveState::DriveIdle;
        fx.directives.push_back(ShowScreen{Screen::Dashboard});
      } else {
        state_ = DriveState::SessionEndedPending;
        fx.directives.push_back(ShowSessEnd{});
      }
      break;
    }
  }
  return fx;
}

Effects SessionCore::on_message(const protocol::Envelope& msg) {
  switch (msg.kind()) {
    case protocol::MessageKind::Heartbeat:
      return {};
    case protocol::MessageKind::LoginSurveyRequest:
      return on_login_request();
    case protocol::MessageKind::DisengagementSurveyRequest:
      return on_disengagement_request(*msg.get_if<DisengagementRequest>());
    default:
      violation(std::string("unexpected ") + std::string(protocol::to_string(msg.kind())) + " from vehicle");
  }
}

Effects SessionCore::on_login_request() {
  Effects fx;
  switch (state_) {
    case DriveState::SessionActive:
      fx.outbound.push_back(protocol::LoginSurvey{drive_->pilot_id, drive_->copilot_id});
      break;
    case DriveState::AwaitingLogin:
      if (!flags_.connection_pending) violation("LoginSurveyRequest without a connection");
      flags_.login_request_pending = true;
      break;
    case DriveState::SessionEndedPending:
      if (!flags_.connection_pending) violation("LoginSurveyRequest without a connection");
      fx.outbound.push_back(protocol::LoginSurvey{drive_->pilot_id, drive_->copilot_id});
      break;
    case DriveState::DriveIdle:
      violation("LoginSurveyRequest without a connection");
  }
  return fx;
}

Effects SessionCore::on_disengagement_request(const DisengagementRequest& req) {
  protocol::validate(req);
  Effects fx;
  switch (state_) {
    case DriveState::SessionActive:
      if (std::holds_alternative<OpenDisengagement>(open_)) violation("a disengagement survey is already open");
      stash_open_event();
      open_ = OpenDisengagement{req};
      fx.directives.push_back(OpenDisengagementSurvey{req});
      break;
    case DriveState::AwaitingLogin:
    case DriveState::SessionEndedPending:
      if (!flags_.connection_pending) violation("DisengagementSurveyRequest without a live session");
      if (flags_.disengagement_pending) violation("a disengagement request is already pending");
      flags_.disengagement_pending = req;
      break;
    case DriveState::DriveIdle:
      violation("DisengagementSurveyRequest without a live session");
  }
  return fx;
}

Effects SessionCore::submit_disengagement(const protocol::DisengagementSurvey& survey) {
  const auto* open = std::get_if<OpenDisengagement>(&open_);
  if (!open) throw Error(Errc::NoOpenSurvey, "no disengagement survey is open");
  protocol::validate(survey);
  if (!(survey.request() == open->request)) {
    throw Error(Errc::SequenceMismatch, "response must echo lateral " + std::to_string(open->request.lateral_seq) +
                                            " longitudinal " + std::to_string(open->request.longitudinal_seq));
  }
  Effects fx;
  fx.outbound.push_back(survey);
  auto& s = session();
  ++s.disengagement_count;
  record(fx, DisengagementSubmitted{drive_->drive_seq, s.session_seq, survey, now()});
  open_ = std::monostate{};
  fx.directives.push_back(ShowScreen{Screen::Session});
  fx.directives.push_back(UpdateCounters{s.disengagement_count, s.event_count});
  return fx;
}

protocol::DisengagementSurvey SessionCore::test_drive_autofill() const {
  const auto* open = std::get_if<OpenDisengagement>(&open_);
  if (!open) throw Error(Errc::NoOpenSurvey, "no disengagement survey is open");
  protocol::DisengagementSurvey s;
  s.lateral_seq = open->request.lateral_seq;
  s.longitudinal_seq = open->request.longitudinal_seq;
  s.longitudinal_comfort = {0};
  s.lateral_comfort = {0};
  s.cause = protocol::DisengagementCause::IntendedAndSafe;
  s.intended_explanation = protocol::IntendedExplanation::PrivateTestArea;
  return s;
}

Effects SessionCore::submit_test_drive() { return submit_disengagement(test_drive_autofill()); }

Effects SessionCore::trigger_event() {
  if (state_ != DriveState::SessionActive) throw Error(Errc::NotInSession, "no active session");
  if (std::holds_alternative<OpenDisengagement>(open_)) {
    throw Error(Errc::SurveyOpen, "finish the disengagement survey first");
  }
  stash_open_event();
  Effects fx;
  auto& s = session();
  const auto seq = s.next_event_seq++;
  ++s.event_count;
  fx.outbound.push_back(protocol::EventFlag{seq});
  record(fx, EventFlagged{drive_->drive_seq, s.session_seq, seq, now()});
  open_ = OpenEvent{seq};
  fx.directives.push_back(OpenEventSurvey{seq});
  fx.directives.push_back(UpdateCounters{s.disengagement_count, s.event_count});
  return fx;
}

Effects SessionCore::save_event_survey(std::uint32_t event_seq, const EventDraft& draft) {
  if (!knows_event(event_seq)) throw Error(Errc::UnknownEvent, "event " + std::to_string(event_seq));
  validate(draft);
  drafts_[event_seq] = draft;
  if (const auto* ev = std::get_if<OpenEvent>(&open_); ev && ev->event_seq == event_seq) open_ = std::monostate{};
  Effects fx;
  fx.directives.push_back(state_ == DriveState::SessionEndedPending ? UiDirective{ShowSessEnd{}}
                                                                     : UiDirective{ShowScreen{Screen::Session}});
  return fx;
}

std::pair<EventDraft, Effects> SessionCore::edit_event_survey(std::uint32_t event_seq) {
  if (!knows_event(event_seq)) throw Error(Errc::UnknownEvent, "event " + std::to_string(event_seq));
  if (std::holds_alternative<OpenDisengagement>(open_)) {
    throw Error(Errc::SurveyOpen, "finish the disengagement survey first");
  }
  const auto* ev = std::get_if<OpenEvent>(&open_);
  if (!ev || ev->event_seq != event_seq) stash_open_event();
  open_ = OpenEvent{event_seq};
  Effects fx;
  fx.directives.push_back(OpenEventSurvey{event_seq});
  const auto it = drafts_.find(event_seq);
  return {it == drafts_.end() ? EventDraft{} : it->second, std::move(fx)};
}

Effects SessionCore::discard_event_survey(std::uint32_t event_seq) {
  if (!knows_event(event_seq)) throw Error(Errc::UnknownEvent, "event " + std::to_string(event_seq));
  drafts_.erase(event_seq);
  if (const auto* ev = std::get_if<OpenEvent>(&open_); ev && ev->event_seq == event_seq) open_ = std::monostate{};
  Effects fx;
  after_draft_resolved(fx);
  return fx;
}

Effects SessionCore::submit_event_survey(const protocol::EventSurvey& survey) {
  if (!knows_event(survey.event_seq)) {
    throw Error(Errc::UnknownEvent, "event " + std::to_string(survey.event_seq));
  }
  protocol::validate(survey);
  Effects fx;
  fx.outbound.push_back(survey);
  record(fx, EventSurveySubmitted{drive_->drive_seq, session().session_seq, survey, now()});
  drafts_.erase(survey.event_seq);
  if (const auto* ev = std::get_if<OpenEvent>(&open_); ev && ev->event_seq == survey.event_seq) {
    open_ = std::monostate{};
  }
  after_draft_resolved(fx);
  return fx;
}

Effects SessionCore::send_comfort_feedback(protocol::ComfortRating longitudinal, protocol::ComfortRating lateral) {
  if (state_ != DriveState::SessionActive) throw Error(Errc::NotInSession, "no active session");
  if (!longitudinal.valid() || !lateral.valid()) {
    throw Error(Errc::InvalidMessage, "comfort rating out of range 0..5");
  }
  Effects fx;
  auto& s = session();
  const auto seq = s.next_event_seq++;
  ++s.event_count;
  const protocol::EventSurvey survey{seq, longitudinal, lateral, std::nullopt, std::nullopt};
  fx.outbound.push_back(protocol::EventFlag{seq});
  fx.outbound.push_back(survey);
  const auto at = now();
  record(fx, EventFlagged{drive_->drive_seq, s.session_seq, seq, at});
  record(fx, EventSurveySubmitted{drive_->drive_seq, s.session_seq, survey, at});
  fx.directives.push_back(UpdateCounters{s.disengagement_count, s.event_count});
  return fx;
}

Effects SessionCore::end_drive() {
  if (state_ != DriveState::DriveIdle) throw Error(Errc::NotIdle, "End Drive is only available on the Dashboard");
  Effects fx;
  record(fx, DriveEnded{drive_->drive_seq, now()});
  drive_.reset();
  drafts_.clear();
  open_ = std::monostate{};
  flags_ = {};
  state_ = DriveState::AwaitingLogin;
  fx.directives.push_back(ShowScreen{Screen::Login});
  return fx;
}

Effects SessionCore::on_connection_status(bool connected) {
  Effects fx;
  if (connected != indicator_) {
    indicator_ = connected;
    fx.directives.push_back(ConnectionIndicator{connected});
  }
  return fx;
}

}  // namespace ridelink::session
