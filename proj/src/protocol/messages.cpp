#include "ridelink/protocol/messages.hpp"

#include <array>
#include <string>

#include "ridelink/error.hpp"

namespace ridelink::protocol {
namespace {

template <typename E, std::size_t N>
struct NameTable {
  std::array<std::string_view, N> names;

  std::string_view name(E v) const noexcept {
    const auto i = static_cast<std::size_t>(v);
    return i < N ? names[i] : std::string_view{"?"};
  }

  std::optional<E> parse(std::string_view s) const noexcept {
    for (std::size_t i = 0; i < N; ++i) {
      if (names[i] == s) return static_cast<E>(i);
    }
    return std::nullopt;
  }
};

constexpr NameTable<LongitudinalCause, 6> kLongitudinal{
    {"CollisionThreat", "TooFast", "TooSlow", "JerkyAcceleration", "JerkyBrake", "FalseBraking"}};
constexpr NameTable<LateralCause, 5> kLateral{
    {"CollisionThreat", "Swerve", "LateralJerk", "TooAggressive", "TooConservative"}};
constexpr NameTable<EgoPosition, 5> kEgo{{"LaneKeep", "Merge", "LaneChange", "Split", "Ramp"}};
constexpr NameTable<DisengagementCause, 4> kCause{
    {"SafetyIssue", "IntendedAndSafe", "EndOfDrive", "Other"}};
constexpr NameTable<IntendedExplanation, 10> kExplanation{
    {"ExitingOddRoadType", "PrivateTestArea", "PlannedBreakStop", "AccidentalDisengagement",
     "EmergencyVehicle", "BetterRouteLane", "HighAccidentZone", "DisengagementTesting",
     "ProactiveOrDiscretionary", "Other"}};
constexpr NameTable<OddContext, 3> kOdd{{"HighTrafficArea", "WeatherConditions", "ConstructionZone"}};
constexpr std::array<std::string_view, 7> kKindNames{
    "Heartbeat",         "LoginSurveyRequest", "LoginSurveyResponse", "DisengagementSurveyRequest",
    "DisengagementSurveyResponse", "EventFlag", "EventSurveyResponse"};

[[noreturn]] void reject(const std::string& why) { throw Error(Errc::InvalidMessage, why); }

void check_text(const std::optional<std::string>& s, const char* field) {
  if (s && !is_valid_utf8(*s)) reject(std::string(field) + " is not valid UTF-8");
}

void check_comfort(ComfortRating r, const char* field) {
  if (!r.valid()) {
    reject(std::string(field) + " out of range 0..5: " + std::to_string(r.value));
  }
}

void check_id(const std::string& id, const char* field) {
  if (id.empty()) reject(std::string(field) + " is empty");
  if (id.size() > kMaxIdBytes) reject(std::string(field) + " longer than 128 bytes");
  if (!is_valid_utf8(id)) reject(std::string(field) + " is not valid UTF-8");
}

template <typename Set, typename Table>
std::string join(const Set& s, const Table& table) {
  std::string out;
  for (auto v : s) {
    if (!out.empty()) out += ',';
    out += table.name(v);
  }
  return out;
}

void describe_detail(const SafetyDetail& d, std::vector<std::pair<std::string, std::string>>& out) {
  out.emplace_back("longitudinal_causes", join(d.longitudinal_causes, kLongitudinal));
  out.emplace_back("lateral_causes", join(d.lateral_causes, kLateral));
  out.emplace_back("ego_position", std::string(kEgo.name(d.ego_position)));
}

}  // namespace

bool is_valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, beyond U+10FFFF
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

void validate(const LoginSurvey& m) {
  check_id(m.pilot_id, "pilot_id");
  check_id(m.copilot_id, "copilot_id");
}

void validate(const DisengagementRequest& m) {
  if (m.lateral_seq == 0 || m.longitudinal_seq == 0) reject("sequence numbers start at 1");
}

void validate(const SafetyDetail& m) {
  if (static_cast<std::size_t>(m.ego_position) > static_cast<std::size_t>(EgoPosition::Ramp)) {
    reject("ego_position out of range");
  }
  for (auto c : m.longitudinal_causes) {
    if (static_cast<std::size_t>(c) > static_cast<std::size_t>(LongitudinalCause::FalseBraking)) {
      reject("unknown longitudinal cause");
    }
  }
  for (auto c : m.lateral_causes) {
    if (static_cast<std::size_t>(c) > static_cast<std::size_t>(LateralCause::TooConservative)) {
      reject("unknown lateral cause");
    }
  }
}

void validate(const DisengagementSurvey& m) {
  validate(m.request());
  check_comfort(m.longitudinal_comfort, "longitudinal_comfort");
  check_comfort(m.lateral_comfort, "lateral_comfort");
  check_text(m.other_text, "other_text");
  check_text(m.additional_info, "additional_info");

  if (static_cast<std::size_t>(m.cause) > static_cast<std::size_t>(DisengagementCause::Other)) {
    reject("cause out of range");
  }
  const bool safety = m.cause == DisengagementCause::SafetyIssue;
  const bool intended = m.cause == DisengagementCause::IntendedAndSafe;
  if (safety != m.safety_detail.has_value()) {
    reject("safety_detail is required iff cause = SafetyIssue");
  }
  if (m.safety_detail) validate(*m.safety_detail);
  if (intended != m.intended_explanation.has_value()) {
    reject("intended_explanation is required iff cause = IntendedAndSafe");
  }
  if (m.intended_explanation &&
      static_cast<std::size_t>(*m.intended_explanation) > static_cast<std::size_t>(IntendedExplanation::Other)) {
    reject("intended_explanation out of range");
  }
  const bool exiting_odd = m.intended_explanation == IntendedExplanation::ExitingOddRoadType;
  if (m.odd_context && !exiting_odd) {
    reject("odd_context is allowed only with ExitingOddRoadType");
  }
  if (m.odd_context &&
      static_cast<std::size_t>(*m.odd_context) > static_cast<std::size_t>(OddContext::ConstructionZone)) {
    reject("odd_context out of range");
  }
  const bool needs_other =
      m.cause == DisengagementCause::Other || m.intended_explanation == IntendedExplanation::Other;
  if (needs_other != m.other_text.has_value()) {
    reject("other_text is required iff cause or explanation is Other");
  }
}

void validate(const EventFlag& m) {
  if (m.event_seq == 0) reject("event_seq starts at 1");
}

void validate(const EventSurvey& m) {
  if (m.event_seq == 0) reject("event_seq starts at 1");
  check_comfort(m.longitudinal_comfort, "longitudinal_comfort");
  check_comfort(m.lateral_comfort, "lateral_comfort");
  if (m.detail) validate(*m.detail);
  check_text(m.additional_info, "additional_info");
}

void validate(const Envelope& m) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (!std::is_same_v<T, Heartbeat> && !std::is_same_v<T, LoginRequest>) {
          validate(p);
        }
      },
      m.payload);
}

std::string_view to_string(MessageKind v) noexcept {
  const auto tag = static_cast<std::uint8_t>(v);
  if (tag < kMinKindTag || tag > kMaxKindTag) return "?";
  return kKindNames[tag - 1];
}
std::string_view to_string(LongitudinalCause v) noexcept { return kLongitudinal.name(v); }
std::string_view to_string(LateralCause v) noexcept { return kLateral.name(v); }
std::string_view to_string(EgoPosition v) noexcept { return kEgo.name(v); }
std::string_view to_string(DisengagementCause v) noexcept { return kCause.name(v); }
std::string_view to_string(IntendedExplanation v) noexcept { return kExplanation.name(v); }
std::string_view to_string(OddContext v) noexcept { return kOdd.name(v); }

std::optional<MessageKind> parse_message_kind(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<MessageKind>(i + 1);
  }
  return std::nullopt;
}
std::optional<LongitudinalCause> parse_longitudinal_cause(std::string_view s) noexcept {
  return kLongitudinal.parse(s);
}
std::optional<LateralCause> parse_lateral_cause(std::string_view s) noexcept { return kLateral.parse(s); }
std::optional<EgoPosition> parse_ego_position(std::string_view s) noexcept { return kEgo.parse(s); }
std::optional<DisengagementCause> parse_disengagement_cause(std::string_view s) noexcept {
  return kCause.parse(s);
}
std::optional<IntendedExplanation> parse_intended_explanation(std::string_view s) noexcept {
  return kExplanation.parse(s);
}
std::optional<OddContext> parse_odd_context(std::string_view s) noexcept { return kOdd.parse(s); }

std::vector<std::pair<std::string, std::string>> describe(const Envelope& m) {
  std::vector<std::pair<std::string, std::string>> out;
  auto num = [](auto v) { return std::to_string(v); };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Heartbeat>) {
          out.emplace_back("timestamp_ms", num(p.timestamp_ms));
        } else if constexpr (std::is_same_v<T, LoginRequest>) {
        } else if constexpr (std::is_same_v<T, LoginSurvey>) {
          out.emplace_back("pilot_id", p.pilot_id);
          out.emplace_back("copilot_id", p.copilot_id);
        } else if constexpr (std::is_same_v<T, DisengagementRequest>) {
          out.emplace_back("lateral_seq", num(p.lateral_seq));
          out.emplace_back("longitudinal_seq", num(p.longitudinal_seq));
        } else if constexpr (std::is_same_v<T, DisengagementSurvey>) {
          out.emplace_back("lateral_seq", num(p.lateral_seq));
          out.emplace_back("longitudinal_seq", num(p.longitudinal_seq));
          out.emplace_back("longitudinal_comfort", num(p.longitudinal_comfort.value));
          out.emplace_back("lateral_comfort", num(p.lateral_comfort.value));
          out.emplace_back("cause", std::string(to_string(p.cause)));
          if (p.safety_detail) describe_detail(*p.safety_detail, out);
          if (p.intended_explanation) {
            out.emplace_back("explanation", std::string(to_string(*p.intended_explanation)));
          }
          if (p.odd_context) out.emplace_back("odd_context", std::string(to_string(*p.odd_context)));
          if (p.other_text) out.emplace_back("other_text", *p.other_text);
          if (p.additional_info) out.emplace_back("additional_info", *p.additional_info);
        } else if constexpr (std::is_same_v<T, EventFlag>) {
          out.emplace_back("event_seq", num(p.event_seq));
        } else if constexpr (std::is_same_v<T, EventSurvey>) {
          out.emplace_back("event_seq", num(p.event_seq));
          out.emplace_back("longitudinal_comfort", num(p.longitudinal_comfort.value));
          out.emplace_back("lateral_comfort", num(p.lateral_comfort.value));
          if (p.detail) describe_detail(*p.detail, out);
          if (p.additional_info) out.emplace_back("additional_info", *p.additional_info);
        }
      },
      m.payload);
  return out;
}

}  // namespace ridelink::protocol
