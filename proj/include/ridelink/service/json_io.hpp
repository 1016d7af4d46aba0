#pragma once

#include "json.hpp"
#include "ridelink/protocol/messages.hpp"
#include "ridelink/session/core.hpp"
#include "ridelink/session/history.hpp"
#include "ridelink/transport/endpoint.hpp"

namespace ridelink::service {

using Json = nlohmann::ordered_json;

// Every from_json throws Error{BadRequest} on a missing field, a wrong type or
// an unknown enum name. Content rules are left to protocol::validate.

Json to_json(const protocol::SafetyDetail& d);
Json to_json(const protocol::DisengagementSurvey& s);
Json to_json(const protocol::EventSurvey& s);
Json to_json(const session::EventDraft& d);
Json to_json(const session::HistoryEvent& ev);
Json to_json(const session::SessionSummary& s);
Json to_json(const session::SessionDetail& d);
Json to_json(const session::UiDirective& d);

protocol::SafetyDetail safety_detail_from_json(const Json& j);
/// lateral_seq/longitudinal_seq may be omitted; `fallback` fills them.
protocol::DisengagementSurvey disengagement_survey_from_json(const Json& j,
                                                             std::optional<protocol::DisengagementRequest> fallback);
protocol::EventSurvey event_survey_from_json(const Json& j, std::uint32_t event_seq);
session::EventDraft event_draft_from_json(const Json& j);
session::HistoryEvent history_event_from_json(const Json& j);

/// The GET /state document: a pure projection of the core plus link status.
Json api_state(const session::SessionCore& core, const transport::ConnectionStatus& status);

/// Parses a request body; an empty body is an empty object.
Json parse_body(const std::string& body);

}  // namespace ridelink::service
