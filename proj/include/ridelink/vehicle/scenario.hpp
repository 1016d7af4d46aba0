#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ridelink/protocol/messages.hpp"

namespace ridelink::vehicle {

struct RequestLogin {
  friend bool operator==(const RequestLogin&, const RequestLogin&) = default;
};
struct RequestDisengagement {
  std::optional<protocol::DisengagementRequest> seq;
  friend bool operator==(const RequestDisengagement&, const RequestDisengagement&) = default;
};
struct ExpectEventFlag {
  std::uint32_t timeout_ms = 5000;
  friend bool operator==(const ExpectEventFlag&, const ExpectEventFlag&) = default;
};
struct Disconnect {
  friend bool operator==(const Disconnect&, const Disconnect&) = default;
};
struct Reconnect {
  friend bool operator==(const Reconnect&, const Reconnect&) = default;
};
struct AwaitResponse {
  protocol::MessageKind kind{};
  std::uint32_t timeout_ms = 0;
  friend bool operator==(const AwaitResponse&, const AwaitResponse&) = default;
};

using Action = std::variant<RequestLogin, RequestDisengagement, ExpectEventFlag, Disconnect, Reconnect, AwaitResponse>;

struct ScenarioStep {
  std::uint32_t at_ms = 0;  // offset from scenario start
  Action action;
  int line = 0;
  friend bool operator==(const ScenarioStep&, const ScenarioStep&) = default;
};

using Scenario = std::vector<ScenarioStep>;

/// One step per line: `<at_ms> <Action> [args]`; `#` starts a comment.
///
///   RequestLogin
///   RequestDisengagement [lat long]
///   ExpectEventFlag [timeout_ms]
///   Disconnect
///   Reconnect
///   AwaitResponse <Kind> <timeout_ms>
///
/// Steps must be in non-decreasing at_ms order. Throws Error{ScenarioParseError}
/// naming the offending line.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

std::string_view action_name(const Action& a) noexcept;

}  // namespace ridelink::vehicle
