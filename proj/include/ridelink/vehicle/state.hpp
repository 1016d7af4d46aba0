#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ridelink/error.hpp"
#include "ridelink/protocol/messages.hpp"

namespace ridelink::vehicle {

struct LogEntry {
  std::int64_t at_ms = 0;
  protocol::MessageKind kind{};
  std::string content;  // rendered key=value pairs
  protocol::Envelope message;
};

/// What receiving one message did, beyond appending it to the log.
struct Receipt {
  bool released = false;           // this response cleared the actuation block
  std::optional<Error> issue;      // SequenceMismatch or OrphanEventSurvey
};

/// Vehicle-side bookkeeping. Not thread-safe; owned by the driver loop.
///
/// Actuation is blocked exactly while a disengagement request is open. Only a
/// response echoing that request's pair releases it.
class VehicleState {
 public:
  /// Opens a disengagement. Without explicit numbers the next counters are
  /// used. Throws Error{WrongState} while a disengagement is already open.
  protocol::DisengagementRequest disengage(std::optional<protocol::DisengagementRequest> explicit_seq = {});

  /// A new connection: counters restart at 1 and flagged events are
  /// forgotten. Returns the still-open request, which must be re-issued.
  std::optional<protocol::DisengagementRequest> on_connected();
  void on_disconnected() { copilot_connected_ = false; }

  Receipt on_message(const protocol::Envelope& msg, std::int64_t at_ms);

  bool copilot_connected() const noexcept { return copilot_connected_; }
  bool actuation_blocked() const noexcept { return open_.has_value(); }
  const std::optional<protocol::DisengagementRequest>& open_disengagement() const noexcept { return open_; }
  std::uint32_t next_lateral_seq() const noexcept { return next_lateral_; }
  std::uint32_t next_longitudinal_seq() const noexcept { return next_longitudinal_; }
  const std::vector<LogEntry>& received_log() const noexcept { return log_; }
  const std::set<std::uint32_t>& flagged_events() const noexcept { return flagged_; }

 private:
  bool copilot_connected_ = false;
  std::optional<protocol::DisengagementRequest> open_;
  std::uint32_t next_lateral_ = 1;
  std::uint32_t next_longitudinal_ = 1;
  std::set<std::uint32_t> flagged_;
  std::vector<LogEntry> log_;
};

/// "k=v k=v" rendering of a message's content.
std::string render_content(const protocol::Envelope& msg);

}  // namespace ridelink::vehicle
