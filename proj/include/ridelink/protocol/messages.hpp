#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace ridelink::protocol {

inline constexpr std::size_t kMaxIdBytes = 128;
inline constexpr std::size_t kMaxFrameBytes = 64 * 1024;

/// One-byte wire tags. Values are part of the wire contract (docs/wire-format.md).
enum class MessageKind : std::uint8_t {
  Heartbeat = 0x01,
  LoginSurveyRequest = 0x02,
  LoginSurveyResponse = 0x03,
  DisengagementSurveyRequest = 0x04,
  DisengagementSurveyResponse = 0x05,
  EventFlag = 0x06,
  EventSurveyResponse = 0x07,
};

inline constexpr std::uint8_t kMinKindTag = 0x01;
inline constexpr std::uint8_t kMaxKindTag = 0x07;

enum class LongitudinalCause : std::uint8_t {
  CollisionThreat,
  TooFast,
  TooSlow,
  JerkyAcceleration,
  JerkyBrake,
  FalseBraking,
};

enum class LateralCause : std::uint8_t {
  CollisionThreat,
  Swerve,
  LateralJerk,
  TooAggressive,
  TooConservative,
};

enum class EgoPosition : std::uint8_t { LaneKeep, Merge, LaneChange, Split, Ramp };

enum class DisengagementCause : std::uint8_t { SafetyIssue, IntendedAndSafe, EndOfDrive, Other };

enum class IntendedExplanation : std::uint8_t {
  ExitingOddRoadType,
  PrivateTestArea,
  PlannedBreakStop,
  AccidentalDisengagement,
  EmergencyVehicle,
  BetterRouteLane,
  HighAccidentZone,
  DisengagementTesting,
  ProactiveOrDiscretionary,
  Other,
};

enum class OddContext : std::uint8_t { HighTrafficArea, WeatherConditions, ConstructionZone };

/// 0 is least comfortable, 5 most. Out-of-range values are representable so
/// that validation (not construction) is the single place they get rejected.
struct ComfortRating {
  int value = 0;

  static constexpr int kMin = 0;
  static constexpr int kMax = 5;

  constexpr bool valid() const noexcept { return value >= kMin && value <= kMax; }
  friend constexpr bool operator==(ComfortRating, ComfortRating) = default;
};

struct Heartbeat {
  std::uint64_t timestamp_ms = 0;
  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

struct LoginRequest {
  friend bool operator==(const LoginRequest&, const LoginRequest&) = default;
};

struct LoginSurvey {
  std::string pilot_id;
  std::string copilot_id;
  friend bool operator==(const LoginSurvey&, const LoginSurvey&) = default;
};

struct DisengagementRequest {
  std::uint32_t lateral_seq = 0;
  std::uint32_t longitudinal_seq = 0;
  friend bool operator==(const DisengagementRequest&, const DisengagementRequest&) = default;
};

struct SafetyDetail {
  std::set<LongitudinalCause> longitudinal_causes;
  std::set<LateralCause> lateral_causes;
  EgoPosition ego_position = EgoPosition::LaneKeep;
  friend bool operator==(const SafetyDetail&, const SafetyDetail&) = default;
};

struct DisengagementSurvey {
  std::uint32_t lateral_seq = 0;
  std::uint32_t longitudinal_seq = 0;
  ComfortRating longitudinal_comfort;
  ComfortRating lateral_comfort;
  DisengagementCause cause = DisengagementCause::EndOfDrive;
  std::optional<SafetyDetail> safety_detail;
  std::optional<IntendedExplanation> intended_explanation;
  std::optional<OddContext> odd_context;
  std::optional<std::string> other_text;
  std::optional<std::string> additional_info;

  DisengagementRequest request() const { return {lateral_seq, longitudinal_seq}; }
  friend bool operator==(const DisengagementSurvey&, const DisengagementSurvey&) = default;
};

struct EventFlag {
  std::uint32_t event_seq = 0;
  friend bool operator==(const EventFlag&, const EventFlag&) = default;
};

struct EventSurvey {
  std::uint32_t event_seq = 0;
  ComfortRating longitudinal_comfort;
  ComfortRating lateral_comfort;
  std::optional<SafetyDetail> detail;
  std::optional<std::string> additional_info;
  friend bool operator==(const EventSurvey&, const EventSurvey&) = default;
};

/// Alternatives are listed in tag order: index + 1 == wire tag.
using Payload = std::variant<Heartbeat, LoginRequest, LoginSurvey, DisengagementRequest,
                             DisengagementSurvey, EventFlag, EventSurvey>;

/// One wire message. The kind is derived from the payload alternative, so the
/// two can never disagree.
struct Envelope {
  Payload payload;

  Envelope() = default;
  template <typename T>
    requires std::is_constructible_v<Payload, T&&>
  Envelope(T&& p) : payload(std::forward<T>(p)) {}  // NOLINT(google-explicit-constructor)

  MessageKind kind() const noexcept {
    return static_cast<MessageKind>(static_cast<std::uint8_t>(payload.index() + 1));
  }

  template <typename T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&payload);
  }

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

// Validation. Each throws Error{InvalidMessage} naming the violated rule.
void validate(const LoginSurvey& m);
void validate(const DisengagementRequest& m);
void validate(const SafetyDetail& m);
void validate(const DisengagementSurvey& m);
void validate(const EventFlag& m);
void validate(const EventSurvey& m);
void validate(const Envelope& m);

bool is_valid_utf8(std::string_view s) noexcept;

// Names used by transcripts, the HTTP API and the CLI.
std::string_view to_string(MessageKind v) noexcept;
std::string_view to_string(LongitudinalCause v) noexcept;
std::string_view to_string(LateralCause v) noexcept;
std::string_view to_string(EgoPosition v) noexcept;
std::string_view to_string(DisengagementCause v) noexcept;
std::string_view to_string(IntendedExplanation v) noexcept;
std::string_view to_string(OddContext v) noexcept;

std::optional<MessageKind> parse_message_kind(std::string_view s) noexcept;
std::optional<LongitudinalCause> parse_longitudinal_cause(std::string_view s) noexcept;
std::optional<LateralCause> parse_lateral_cause(std::string_view s) noexcept;
std::optional<EgoPosition> parse_ego_position(std::string_view s) noexcept;
std::optional<DisengagementCause> parse_disengagement_cause(std::string_view s) noexcept;
std::optional<IntendedExplanation> parse_intended_explanation(std::string_view s) noexcept;
std::optional<OddContext> parse_odd_context(std::string_view s) noexcept;

/// Flattened "key=value" view of a message's content, in a fixed field order.
/// Absent optionals are omitted; sets render as comma-joined names.
std::vector<std::pair<std::string, std::string>> describe(const Envelope& m);

}  // namespace ridelink::protocol
