#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "ridelink/session/core.hpp"

namespace ridelink::session {

/// The eleven inputs the transition table covers.
enum class Input {
  Login,
  Connect,
  Disconnect,
  DisengagementRequest,
  DisengagementSubmit,
  TriggerEvent,
  Save,
  Discard,
  SubmitEvent,
  Feedback,
  EndDrive,
};

inline constexpr std::array<Input, 11> kAllInputs = {
    Input::Login,        Input::Connect, Input::Disconnect, Input::DisengagementRequest, Input::DisengagementSubmit,
    Input::TriggerEvent, Input::Save,    Input::Discard,    Input::SubmitEvent,          Input::Feedback,
    Input::EndDrive};

inline constexpr std::array<DriveState, 4> kAllStates = {DriveState::AwaitingLogin, DriveState::DriveIdle,
                                                         DriveState::SessionActive, DriveState::SessionEndedPending};

std::string_view to_string(Input in) noexcept;

/// Canonical way to reach each state from a fresh core:
///   AwaitingLogin        fresh
///   DriveIdle            login
///   SessionActive        login, connect
///   SessionEndedPending  login, connect, trigger (event 1), save 1, disconnect
SessionCore canonical_core(DriveState state);

/// Applies one input with its canonical arguments (login "pilot"/"copilot",
/// disengagement {1,1}, test-drive submission echoing the open request or
/// {1,1}, event 1, feedback 3/3).
Effects apply_input(SessionCore& core, Input in);

struct TransitionRow {
  DriveState from;
  Input input;
  std::string result;      // next state name, or "error:CODE"
  std::string directives;  // comma-joined directive names, "-" when none
  std::string outbound;    // comma-joined message kinds, "-" when none
};

std::vector<TransitionRow> transition_table();

/// Markdown table with columns State | Input | Result | Directives | Outbound.
std::string render_transition_table(const std::vector<TransitionRow>& rows);

}  // namespace ridelink::session
