#include "ridelink/protocol/codec.hpp"

#include <string>

#include "ridelink/error.hpp"

namespace ridelink::protocol {
namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }

  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }

  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }

  void u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }

  void str(const std::string& s) {
    if (s.size() > 0xFFFF) throw Error(Errc::InvalidMessage, "string longer than 65535 bytes");
    u16(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }

  void opt_str(const std::optional<std::string>& s) {
    u8(s ? 1 : 0);
    if (s) str(*s);
  }

  template <typename E>
  void opt_enum(const std::optional<E>& e) {
    u8(e ? 1 : 0);
    if (e) u8(static_cast<std::uint8_t>(*e));
  }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }

  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }

  std::string str() {
    const auto n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool flag() {
    const auto f = u8();
    if (f > 1) throw Error(Errc::MalformedFrame, "presence flag must be 0 or 1");
    return f == 1;
  }

  std::optional<std::string> opt_str() {
    if (!flag()) return std::nullopt;
    return str();
  }

  template <typename E>
  std::optional<E> opt_enum() {
    if (!flag()) return std::nullopt;
    return static_cast<E>(u8());
  }

  void finish() const {
    if (pos_ != in_.size()) throw Error(Errc::MalformedFrame, "trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(Errc::MalformedFrame, "truncated payload");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

template <typename E>
std::uint8_t mask_of(const std::set<E>& s) {
  std::uint8_t m = 0;
  for (auto v : s) m = static_cast<std::uint8_t>(m | (1u << static_cast<unsigned>(v)));
  return m;
}

template <typename E>
std::set<E> set_of(std::uint8_t mask, unsigned width) {
  if (mask >> width) throw Error(Errc::InvalidMessage, "unknown bit in cause mask");
  std::set<E> out;
  for (unsigned b = 0; b < width; ++b) {
    if (mask & (1u << b)) out.insert(static_cast<E>(b));
  }
  return out;
}

void put_detail(Writer& w, const SafetyDetail& d) {
  w.u8(mask_of(d.longitudinal_causes));
  w.u8(mask_of(d.lateral_causes));
  w.u8(static_cast<std::uint8_t>(d.ego_position));
}

SafetyDetail get_detail(Reader& r) {
  SafetyDetail d;
  d.longitudinal_causes = set_of<LongitudinalCause>(r.u8(), 6);
  d.lateral_causes = set_of<LateralCause>(r.u8(), 5);
  d.ego_position = static_cast<EgoPosition>(r.u8());
  return d;
}

void put_body(Writer& w, const Heartbeat& m) { w.u64(m.timestamp_ms); }
void put_body(Writer&, const LoginRequest&) {}
void put_body(Writer& w, const LoginSurvey& m) {
  w.str(m.pilot_id);
  w.str(m.copilot_id);
}
void put_body(Writer& w, const DisengagementRequest& m) {
  w.u32(m.lateral_seq);
  w.u32(m.longitudinal_seq);
}
void put_body(Writer& w, const DisengagementSurvey& m) {
  w.u32(m.lateral_seq);
  w.u32(m.longitudinal_seq);
  w.u8(static_cast<std::uint8_t>(m.longitudinal_comfort.value));
  w.u8(static_cast<std::uint8_t>(m.lateral_comfort.value));
  w.u8(static_cast<std::uint8_t>(m.cause));
  w.u8(m.safety_detail ? 1 : 0);
  if (m.safety_detail) put_detail(w, *m.safety_detail);
  w.opt_enum(m.intended_explanation);
  w.opt_enum(m.odd_context);
  w.opt_str(m.other_text);
  w.opt_str(m.additional_info);
}
void put_body(Writer& w, const EventFlag& m) { w.u32(m.event_seq); }
void put_body(Writer& w, const EventSurvey& m) {
  w.u32(m.event_seq);
  w.u8(static_cast<std::uint8_t>(m.longitudinal_comfort.value));
  w.u8(static_cast<std::uint8_t>(m.lateral_comfort.value));
  w.u8(m.detail ? 1 : 0);
  if (m.detail) put_detail(w, *m.detail);
  w.opt_str(m.additional_info);
}

Payload get_body(Reader& r, MessageKind kind) {
  switch (kind) {
    case MessageKind::Heartbeat:
      return Heartbeat{r.u64()};
    case MessageKind::LoginSurveyRequest:
      return LoginRequest{};
    case MessageKind::LoginSurveyResponse: {
      LoginSurvey m;
      m.pilot_id = r.str();
      m.copilot_id = r.str();
      return m;
    }
    case MessageKind::DisengagementSurveyRequest: {
      DisengagementRequest m;
      m.lateral_seq = r.u32();
      m.longitudinal_seq = r.u32();
      return m;
    }
    case MessageKind::DisengagementSurveyResponse: {
      DisengagementSurvey m;
      m.lateral_seq = r.u32();
      m.longitudinal_seq = r.u32();
      m.longitudinal_comfort.value = r.u8();
      m.lateral_comfort.value = r.u8();
      m.cause = static_cast<DisengagementCause>(r.u8());
      if (r.flag()) m.safety_detail = get_detail(r);
      m.intended_explanation = r.opt_enum<IntendedExplanation>();
      m.odd_context = r.opt_enum<OddContext>();
      m.other_text = r.opt_str();
      m.additional_info = r.opt_str();
      return m;
    }
    case MessageKind::EventFlag:
      return EventFlag{r.u32()};
    case MessageKind::EventSurveyResponse: {
      EventSurvey m;
      m.event_seq = r.u32();
      m.longitudinal_comfort.value = r.u8();
      m.lateral_comfort.value = r.u8();
      if (r.flag()) m.detail = get_detail(r);
      m.additional_info = r.opt_str();
      return m;
    }
  }
  throw Error(Errc::UnknownKind);
}

}  // namespace

Bytes encode(const Envelope& msg) {
  validate(msg);
  Writer w;
  w.u8(static_cast<std::uint8_t>(msg.kind()));
  std::visit([&](const auto& p) { put_body(w, p); }, msg.payload);
  auto out = w.take();
  if (out.size() > kMaxFrameBytes) {
    throw Error(Errc::InvalidMessage, "encoded message exceeds 64 KiB");
  }
  return out;
}

Envelope decode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(Errc::MalformedFrame, "empty body");
  if (bytes.size() > kMaxFrameBytes) throw Error(Errc::MalformedFrame, "body exceeds 64 KiB");
  const auto tag = bytes[0];
  if (tag < kMinKindTag || tag > kMaxKindTag) {
    throw Error(Errc::UnknownKind, "unknown tag " + std::to_string(tag));
  }
  Reader r(bytes.subspan(1));
  Envelope msg;
  msg.payload = get_body(r, static_cast<MessageKind>(tag));
  r.finish();
  validate(msg);
  return msg;
}

}  // namespace ridelink::protocol
