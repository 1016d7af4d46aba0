#include "ridelink/vehicle/state.hpp"

#include <algorithm>

#include "ridelink/record.hpp"

namespace ridelink::vehicle {

using protocol::DisengagementRequest;

std::string render_content(const protocol::Envelope& msg) {
  std::string out;
  for (const auto& [k, v] : protocol::describe(msg)) {
    if (!out.empty()) out += ' ';
    out += k + "=" + quote_value(v);
  }
  return out;
}

DisengagementRequest VehicleState::disengage(std::optional<DisengagementRequest> explicit_seq) {
  if (open_) {
    throw Error(Errc::WrongState, "actuation already blocked by " + std::to_string(open_->lateral_seq) + "/" +
                                      std::to_string(open_->longitudinal_seq));
  }
  DisengagementRequest req = explicit_seq.value_or(DisengagementRequest{next_lateral_, next_longitudinal_});
  protocol::validate(req);
  // Manual numbers are sent as given; automatic ones continue above them.
  next_lateral_ = std::max(next_lateral_, req.lateral_seq + 1);
  next_longitudinal_ = std::max(next_longitudinal_, req.longitudinal_seq + 1);
  open_ = req;
  return req;
}

std::optional<DisengagementRequest> VehicleState::on_connected() {
  copilot_connected_ = true;
  flagged_.clear();
  next_lateral_ = 1;
  next_longitudinal_ = 1;
  if (open_) {
    next_lateral_ = open_->lateral_seq + 1;
    next_longitudinal_ = open_->longitudinal_seq + 1;
  }
  return open_;
}

Receipt VehicleState::on_message(const protocol::Envelope& msg, std::int64_t at_ms) {
  log_.push_back({at_ms, msg.kind(), render_content(msg), msg});
  Receipt r;
  if (const auto* s = msg.get_if<protocol::DisengagementSurvey>()) {
    if (open_ && *open_ == s->request()) {
      open_.reset();
      r.released = true;
    } else {
      const auto got = std::to_string(s->lateral_seq) + "/" + std::to_string(s->longitudinal_seq);
      const auto want =
          open_ ? std::to_string(open_->lateral_seq) + "/" + std::to_string(open_->longitudinal_seq) : "none";
      r.issue = Error(Errc::SequenceMismatch, "response " + got + ", open request " + want);
    }
  } else if (const auto* f = msg.get_if<protocol::EventFlag>()) {
    flagged_.insert(f->event_seq);
  } else if (const auto* e = msg.get_if<protocol::EventSurvey>()) {
    if (!flagged_.contains(e->event_seq)) {
      r.issue = Error(Errc::OrphanEventSurvey, "no EventFlag " + std::to_string(e->event_seq));
    }
  }
  return r;
}

}  // namespace ridelink::vehicle
