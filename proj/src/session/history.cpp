#include "ridelink/session/history.hpp"

#include <algorithm>

#include "ridelink/error.hpp"

namespace ridelink::session {

void History::apply(const HistoryEvent& ev) {
  std::visit(
      [this](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DriveStarted>) {
          drives_[e.drive_seq] = {e.pilot_id, e.copilot_id};
          last_drive_seq_ = std::max(last_drive_seq_, e.drive_seq);
        } else if constexpr (std::is_same_v<T, SessionStarted>) {
          SessionDetail d;
          d.drive_seq = e.drive_seq;
          d.session_seq = e.session_seq;
          if (auto it = drives_.find(e.drive_seq); it != drives_.end()) {
            d.pilot_id = it->second.pilot_id;
            d.copilot_id = it->second.copilot_id;
          }
          d.started_at_ms = e.at_ms;
          open_[{e.drive_seq, e.session_seq}] = d;
        } else if constexpr (std::is_same_v<T, EventFlagged>) {
          if (auto it = open_.find({e.drive_seq, e.session_seq}); it != open_.end()) ++it->second.event_count;
        } else if constexpr (std::is_same_v<T, DisengagementSubmitted>) {
          if (auto it = open_.find({e.drive_seq, e.session_seq}); it != open_.end()) {
            ++it->second.disengagement_count;
          }
        } else if constexpr (std::is_same_v<T, SessionEnded>) {
          if (auto it = open_.find({e.drive_seq, e.session_seq}); it != open_.end()) {
            it->second.ended_at_ms = std::max(e.at_ms, it->second.started_at_ms);
            ended_.push_back(std::move(it->second));
            open_.erase(it);
          }
        } else if constexpr (std::is_same_v<T, DriveEnded>) {
          std::erase_if(open_, [&](const auto& kv) { return kv.first.first == e.drive_seq; });
        }
        // EventSurveySubmitted does not change any history view.
      },
      ev);
}

std::vector<SessionSummary> History::summaries() const {
  std::vector<SessionSummary> out;
  out.reserve(ended_.size());
  for (const auto& d : ended_) out.push_back(d.summary());
  return out;
}

const SessionDetail& History::detail(std::uint32_t drive_seq, std::uint32_t session_seq) const {
  for (const auto& d : ended_) {
    if (d.drive_seq == drive_seq && d.session_seq == session_seq) return d;
  }
  throw Error(Errc::UnknownSession,
              "drive " + std::to_string(drive_seq) + " session " + std::to_string(session_seq));
}

}  // namespace ridelink::session
