#include "ridelink/service/json_io.hpp"

#include "ridelink/error.hpp"

namespace ridelink::service {
namespace {

using namespace protocol;
using namespace session;

[[noreturn]] void bad(const std::string& why) { throw Error(Errc::BadRequest, why); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) bad("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

bool has(const Json& j, const char* key) {
  return j.is_object() && j.contains(key) && !j.at(key).is_null();
}

std::uint32_t u32(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 0xFFFFFFFFull) bad(std::string("'") + key + "' must be an unsigned 32-bit integer");
  return v.get<std::uint32_t>();
}

std::int64_t i64(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) bad(std::string("'") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::string str(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) bad(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> opt_str(const Json& j, const char* key) {
  if (!has(j, key)) return std::nullopt;
  return str(j, key);
}

ComfortRating rating(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) bad(std::string("'") + key + "' must be an integer rating");
  return ComfortRating{static_cast<int>(std::clamp<std::int64_t>(v.get<std::int64_t>(), -1, 99))};
}

template <typename E>
E enum_of(const Json& j, const char* key, std::optional<E> (*parse)(std::string_view) noexcept) {
  const auto s = str(j, key);
  const auto v = parse(s);
  if (!v) bad("unknown value '" + s + "' for '" + key + "'");
  return *v;
}

template <typename E>
Json names(const std::set<E>& s) {
  Json a = Json::array();
  for (auto v : s) a.push_back(std::string(to_string(v)));
  return a;
}

template <typename E>
std::set<E> set_of(const Json& j, const char* key, std::optional<E> (*parse)(std::string_view) noexcept) {
  const auto& v = field(j, key);
  if (!v.is_array()) bad(std::string("'") + key + "' must be an array");
  std::set<E> out;
  for (const auto& e : v) {
    if (!e.is_string()) bad(std::string("'") + key + "' must hold strings");
    const auto p = parse(e.get<std::string>());
    if (!p) bad("unknown value '" + e.get<std::string>() + "' in '" + key + "'");
    out.insert(*p);
  }
  return out;
}

template <typename T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    if constexpr (std::is_enum_v<T>) {
      j[key] = std::string(to_string(*v));
    } else {
      j[key] = *v;
    }
  }
}

}  // namespace

Json to_json(const SafetyDetail& d) {
  return Json{{"longitudinal_causes", names(d.longitudinal_causes)},
              {"lateral_causes", names(d.lateral_causes)},
              {"ego_position", std::string(to_string(d.ego_position))}};
}

Json to_json(const DisengagementSurvey& s) {
  Json j{{"lateral_seq", s.lateral_seq},
         {"longitudinal_seq", s.longitudinal_seq},
         {"longitudinal_comfort", s.longitudinal_comfort.value},
         {"lateral_comfort", s.lateral_comfort.value},
         {"cause", std::string(to_string(s.cause))}};
  if (s.safety_detail) j["safety_detail"] = to_json(*s.safety_detail);
  put_opt(j, "intended_explanation", s.intended_explanation);
  put_opt(j, "odd_context", s.odd_context);
  put_opt(j, "other_text", s.other_text);
  put_opt(j, "additional_info", s.additional_info);
  return j;
}

Json to_json(const EventSurvey& s) {
  Json j{{"event_seq", s.event_seq},
         {"longitudinal_comfort", s.longitudinal_comfort.value},
         {"lateral_comfort", s.lateral_comfort.value}};
  if (s.detail) j["detail"] = to_json(*s.detail);
  put_opt(j, "additional_info", s.additional_info);
  return j;
}

Json to_json(const EventDraft& d) {
  Json j = Json::object();
  if (d.longitudinal_comfort) j["longitudinal_comfort"] = d.longitudinal_comfort->value;
  if (d.lateral_comfort) j["lateral_comfort"] = d.lateral_comfort->value;
  if (d.detail) j["detail"] = to_json(*d.detail);
  put_opt(j, "additional_info", d.additional_info);
  return j;
}

SafetyDetail safety_detail_from_json(const Json& j) {
  SafetyDetail d;
  d.longitudinal_causes = set_of<LongitudinalCause>(j, "longitudinal_causes", parse_longitudinal_cause);
  d.lateral_causes = set_of<LateralCause>(j, "lateral_causes", parse_lateral_cause);
  d.ego_position = enum_of<EgoPosition>(j, "ego_position", parse_ego_position);
  return d;
}

DisengagementSurvey disengagement_survey_from_json(const Json& j, std::optional<DisengagementRequest> fallback) {
  DisengagementSurvey s;
  if (has(j, "lateral_seq") || has(j, "longitudinal_seq") || !fallback) {
    s.lateral_seq = u32(j, "lateral_seq");
    s.longitudinal_seq = u32(j, "longitudinal_seq");
  } else {
    s.lateral_seq = fallback->lateral_seq;
    s.longitudinal_seq = fallback->longitudinal_seq;
  }
  s.longitudinal_comfort = rating(j, "longitudinal_comfort");
  s.lateral_comfort = rating(j, "lateral_comfort");
  s.cause = enum_of<DisengagementCause>(j, "cause", parse_disengagement_cause);
  if (has(j, "safety_detail")) s.safety_detail = safety_detail_from_json(j.at("safety_detail"));
  if (has(j, "intended_explanation")) {
    s.intended_explanation = enum_of<IntendedExplanation>(j, "intended_explanation", parse_intended_explanation);
  }
  if (has(j, "odd_context")) s.odd_context = enum_of<OddContext>(j, "odd_context", parse_odd_context);
  s.other_text = opt_str(j, "other_text");
  s.additional_info = opt_str(j, "additional_info");
  return s;
}

EventSurvey event_survey_from_json(const Json& j, std::uint32_t event_seq) {
  EventSurvey s;
  s.event_seq = event_seq;
  s.longitudinal_comfort = rating(j, "longitudinal_comfort");
  s.lateral_comfort = rating(j, "lateral_comfort");
  if (has(j, "detail")) s.detail = safety_detail_from_json(j.at("detail"));
  s.additional_info = opt_str(j, "additional_info");
  return s;
}

EventDraft event_draft_from_json(const Json& j) {
  if (!j.is_object()) bad("expected a JSON object");
  EventDraft d;
  if (has(j, "longitudinal_comfort")) d.longitudinal_comfort = rating(j, "longitudinal_comfort");
  if (has(j, "lateral_comfort")) d.lateral_comfort = rating(j, "lateral_comfort");
  if (has(j, "detail")) d.detail = safety_detail_from_json(j.at("detail"));
  d.additional_info = opt_str(j, "additional_info");
  return d;
}

Json to_json(const HistoryEvent& ev) {
  return std::visit(
      [](const auto& e) -> Json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DriveStarted>) {
          return {{"type", "DriveStarted"}, {"drive_seq", e.drive_seq}, {"pilot_id", e.pilot_id},
                  {"copilot_id", e.copilot_id}, {"at_ms", e.at_ms}};
        } else if constexpr (std::is_same_v<T, DriveEnded>) {
          return {{"type", "DriveEnded"}, {"drive_seq", e.drive_seq}, {"at_ms", e.at_ms}};
        } else if constexpr (std::is_same_v<T, SessionStarted>) {
          return {{"type", "SessionStarted"}, {"drive_seq", e.drive_seq}, {"session_seq", e.session_seq},
                  {"at_ms", e.at_ms}};
        } else if constexpr (std::is_same_v<T, SessionEnded>) {
          return {{"type", "SessionEnded"}, {"drive_seq", e.drive_seq}, {"session_seq", e.session_seq},
                  {"at_ms", e.at_ms}};
        } else if constexpr (std::is_same_v<T, EventFlagged>) {
          return {{"type", "EventFlagged"}, {"drive_seq", e.drive_seq}, {"session_seq", e.session_seq},
                  {"event_seq", e.event_seq}, {"at_ms", e.at_ms}};
        } else if constexpr (std::is_same_v<T, DisengagementSubmitted>) {
          return {{"type", "DisengagementSubmitted"}, {"drive_seq", e.drive_seq}, {"session_seq", e.session_seq},
                  {"survey", to_json(e.survey)}, {"at_ms", e.at_ms}};
        } else {
          return {{"type", "EventSurveySubmitted"}, {"drive_seq", e.drive_seq}, {"session_seq", e.session_seq},
                  {"survey", to_json(e.survey)}, {"at_ms", e.at_ms}};
        }
      },
      ev);
}

HistoryEvent history_event_from_json(const Json& j) {
  const auto type = str(j, "type");
  if (type == "DriveStarted") {
    return DriveStarted{u32(j, "drive_seq"), str(j, "pilot_id"), str(j, "copilot_id"), i64(j, "at_ms")};
  }
  if (type == "DriveEnded") return DriveEnded{u32(j, "drive_seq"), i64(j, "at_ms")};
  if (type == "SessionStarted") return SessionStarted{u32(j, "drive_seq"), u32(j, "session_seq"), i64(j, "at_ms")};
  if (type == "SessionEnded") return SessionEnded{u32(j, "drive_seq"), u32(j, "session_seq"), i64(j, "at_ms")};
  if (type == "EventFlagged") {
    return EventFlagged{u32(j, "drive_seq"), u32(j, "session_seq"), u32(j, "event_seq"), i64(j, "at_ms")};
  }
  if (type == "DisengagementSubmitted") {
    return DisengagementSubmitted{u32(j, "drive_seq"), u32(j, "session_seq"),
                                  disengagement_survey_from_json(field(j, "survey"), std::nullopt), i64(j, "at_ms")};
  }
  if (type == "EventSurveySubmitted") {
    const auto& s = field(j, "survey");
    return EventSurveySubmitted{u32(j, "drive_seq"), u32(j, "session_seq"),
                                event_survey_from_json(s, u32(s, "event_seq")), i64(j, "at_ms")};
  }
  bad("unknown journal record type '" + type + "'");
}

Json to_json(const SessionSummary& s) {
  return {{"drive_seq", s.drive_seq},
          {"session_seq", s.session_seq},
          {"pilot_id", s.pilot_id},
          {"disengagement_count", s.disengagement_count}};
}

Json to_json(const SessionDetail& d) {
  return {{"drive_seq", d.drive_seq},
          {"session_seq", d.session_seq},
          {"pilot_id", d.pilot_id},
          {"copilot_id", d.copilot_id},
          {"disengagement_count", d.disengagement_count},
          {"event_count", d.event_count},
          {"started_at_ms", d.started_at_ms},
          {"ended_at_ms", d.ended_at_ms},
          {"duration_ms", d.duration_ms()}};
}

Json to_json(const UiDirective& d) {
  Json j{{"directive", std::string(directive_name(d))}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ShowScreen>) {
          j["screen"] = std::string(to_string(v.screen));
        } else if constexpr (std::is_same_v<T, OpenDisengagementSurvey>) {
          j["lateral_seq"] = v.request.lateral_seq;
          j["longitudinal_seq"] = v.request.longitudinal_seq;
        } else if constexpr (std::is_same_v<T, OpenEventSurvey>) {
          j["event_seq"] = v.event_seq;
        } else if constexpr (std::is_same_v<T, UpdateCounters>) {
          j["disengagement_count"] = v.disengagement_count;
          j["event_count"] = v.event_count;
        } else if constexpr (std::is_same_v<T, ConnectionIndicator>) {
          j["connected"] = v.connected;
        }
      },
      d);
  return j;
}

Json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
}

Json api_state(const session::SessionCore& core, const transport::ConnectionStatus& status) {
  Json j;
  j["drive_state"] = std::string(to_string(core.state()));
  j["connection"] = {{"connected", status.connected},
                     {"last_heartbeat_received_ms", status.last_heartbeat_received_ms
                                                        ? Json(*status.last_heartbeat_received_ms)
                                                        : Json(nullptr)}};
  j["indicator"] = core.indicator();
  if (const auto& d = core.drive()) {
    j["drive"] = {{"drive_seq", d->drive_seq}, {"pilot_id", d->pilot_id}, {"copilot_id", d->copilot_id}};
  } else {
    j["drive"] = nullptr;
  }
  if (const auto* s = core.current_session()) {
    j["current_session"] = {{"session_seq", s->session_seq},
                            {"disengagement_count", s->disengagement_count},
                            {"event_count", s->event_count}};
  } else {
    j["current_session"] = nullptr;
  }
  j["pending_cards"] = core.pending_cards();
  if (const auto* o = std::get_if<session::OpenDisengagement>(&core.open_survey())) {
    j["open_survey"] = {{"type", "Disengagement"},
                        {"lateral_seq", o->request.lateral_seq},
                        {"longitudinal_seq", o->request.longitudinal_seq}};
  } else if (const auto* e = std::get_if<session::OpenEvent>(&core.open_survey())) {
    j["open_survey"] = {{"type", "Event"}, {"event_seq", e->event_seq}};
  } else {
    j["open_survey"] = nullptr;
  }
  const auto& f = core.flags();
  j["pre_login"] = {{"connection_pending", f.connection_pending},
                    {"login_request_pending", f.login_request_pending},
                    {"disengagement_pending", f.disengagement_pending
                                                  ? Json{{"lateral_seq", f.disengagement_pending->lateral_seq},
                                                         {"longitudinal_seq", f.disengagement_pending->longitudinal_seq}}
                                                  : Json(nullptr)}};
  return j;
}

}  // namespace ridelink::service
