#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>

#include "ridelink/protocol/codec.hpp"

namespace ridelink::protocol {

/// An ordered, reliable byte stream. read_some blocks until at least one byte
/// is available and returns 0 once the stream is closed.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual std::size_t read_some(std::span<std::uint8_t> buf) = 0;
  virtual void write_all(std::span<const std::uint8_t> buf) = 0;
};

inline constexpr std::size_t kFrameHeaderBytes = 4;

/// 4-byte big-endian body length followed by the encoded body.
Bytes frame(const Envelope& msg);

void write_frame(ByteStream& stream, const Envelope& msg);

/// Reads exactly one frame, retrying partial reads. Throws StreamClosed if the
/// stream ends (cleanly or mid-frame) and FrameTooLarge when the declared
/// length exceeds kMaxFrameBytes; the caller must drop the connection then.
Envelope read_frame(ByteStream& stream);

}  // namespace ridelink::protocol

namespace ridelink::protocol {

/// Incremental frame parser for non-blocking readers: feed arbitrary chunks,
/// then pop complete messages in arrival order. Errors (FrameTooLarge or any
/// decode error) are thrown from feed() and leave the assembler unusable.
class FrameAssembler {
 public:
  void feed(std::span<const std::uint8_t> chunk);
  std::optional<Envelope> pop();
  std::size_t buffered_bytes() const noexcept { return buf_.size(); }

 private:
  Bytes buf_;
  std::deque<Envelope> ready_;
};

}  // namespace ridelink::protocol
