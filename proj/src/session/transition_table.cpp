#include "ridelink/session/transition_table.hpp"

#include <sstream>

#include "ridelink/error.hpp"

namespace ridelink::session {

std::string_view to_string(Input in) noexcept {
  switch (in) {
    case Input::Login: return "login";
    case Input::Connect: return "connect";
    case Input::Disconnect: return "disconnect";
    case Input::DisengagementRequest: return "diseng-request";
    case Input::DisengagementSubmit: return "diseng-submit";
    case Input::TriggerEvent: return "trigger-event";
    case Input::Save: return "save";
    case Input::Discard: return "discard";
    case Input::SubmitEvent: return "submit-event";
    case Input::Feedback: return "feedback";
    case Input::EndDrive: return "end-drive";
  }
  return "?";
}

SessionCore canonical_core(DriveState state) {
  std::int64_t t = 0;
  SessionCore core([t]() mutable { return t += 1000; });
  if (state == DriveState::AwaitingLogin) return core;
  core.initiate_drive("pilot", "copilot");
  if (state == DriveState::DriveIdle) return core;
  core.on_peer_connected();
  if (state == DriveState::SessionActive) return core;
  core.trigger_event();
  core.save_event_survey(1, {});
  core.on_peer_disconnected();
  return core;
}

Effects apply_input(SessionCore& core, Input in) {
  switch (in) {
    case Input::Login:
      return core.initiate_drive("pilot", "copilot");
    case Input::Connect:
      return core.on_peer_connected();
    case Input::Disconnect:
      return core.on_peer_disconnected();
    case Input::DisengagementRequest:
      return core.on_disengagement_request({1, 1});
    case Input::DisengagementSubmit: {
      if (std::holds_alternative<OpenDisengagement>(core.open_survey())) return core.submit_test_drive();
      protocol::DisengagementSurvey s;
      s.lateral_seq = 1;
      s.longitudinal_seq = 1;
      s.cause = protocol::DisengagementCause::IntendedAndSafe;
      s.intended_explanation = protocol::IntendedExplanation::PrivateTestArea;
      return core.submit_disengagement(s);
    }
    case Input::TriggerEvent:
      return core.trigger_event();
    case Input::Save:
      return core.save_event_survey(1, EventDraft{protocol::ComfortRating{3}, {}, {}, {}});
    case Input::Discard:
      return core.discard_event_survey(1);
    case Input::SubmitEvent:
      return core.submit_event_survey({1, {3}, {3}, std::nullopt, std::nullopt});
    case Input::Feedback:
      return core.send_comfort_feedback({3}, {3});
    case Input::EndDrive:
      return core.end_drive();
  }
  return {};
}

std::vector<TransitionRow> transition_table() {
  std::vector<TransitionRow> rows;
  for (auto state : kAllStates) {
    for (auto in : kAllInputs) {
      auto core = canonical_core(state);
      TransitionRow row{state, in, {}, "-", "-"};
      try {
        const auto fx = apply_input(core, in);
        row.result = std::string(to_string(core.state()));
        std::string d;
        for (const auto& dir : fx.directives) {
          if (!d.empty()) d += ",";
          d += directive_name(dir);
        }
        std::string o;
        for (const auto& m : fx.outbound) {
          if (!o.empty()) o += ",";
          o += protocol::to_string(m.kind());
        }
        if (!d.empty()) row.directives = d;
        if (!o.empty()) row.outbound = o;
      } catch (const Error& e) {
        row.result = "error:" + std::string(errc_name(e.code()));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string render_transition_table(const std::vector<TransitionRow>& rows) {
  std::ostringstream out;
  out << "| State | Input | Result | Directives | Outbound |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << to_string(r.from) << " | " << to_string(r.input) << " | " << r.result << " | " << r.directives
        << " | " << r.outbound << " |\n";
  }
  return out.str();
}

}  // namespace ridelink::session
