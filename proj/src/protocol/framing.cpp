#include "ridelink/protocol/framing.hpp"

#include <array>
#include <string>

#include "ridelink/error.hpp"

namespace ridelink::protocol {
namespace {

void read_exact(ByteStream& stream, std::span<std::uint8_t> buf) {
  std::size_t got = 0;
  while (got < buf.size()) {
    const auto n = stream.read_some(buf.subspan(got));
    if (n == 0) {
      throw Error(Errc::StreamClosed, got == 0 ? "end of stream" : "end of stream inside a frame");
    }
    got += n;
  }
}

}  // namespace

Bytes frame(const Envelope& msg) {
  const auto body = encode(msg);
  Bytes out;
  out.reserve(kFrameHeaderBytes + body.size());
  const auto n = static_cast<std::uint32_t>(body.size());
  out.push_back(static_cast<std::uint8_t>(n >> 24));
  out.push_back(static_cast<std::uint8_t>(n >> 16));
  out.push_back(static_cast<std::uint8_t>(n >> 8));
  out.push_back(static_cast<std::uint8_t>(n));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

void write_frame(ByteStream& stream, const Envelope& msg) {
  const auto bytes = frame(msg);
  stream.write_all(bytes);
}

Envelope read_frame(ByteStream& stream) {
  std::array<std::uint8_t, kFrameHeaderBytes> header{};
  read_exact(stream, header);
  const std::uint32_t len = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                            (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (len > kMaxFrameBytes) {
    throw Error(Errc::FrameTooLarge, "declared length " + std::to_string(len));
  }
  Bytes body(len);
  read_exact(stream, body);
  return decode(body);
}

}  // namespace ridelink::protocol

namespace ridelink::protocol {

void FrameAssembler::feed(std::span<const std::uint8_t> chunk) {
  buf_.insert(buf_.end(), chunk.begin(), chunk.end());
  std::size_t off = 0;
  while (buf_.size() - off >= kFrameHeaderBytes) {
    const std::uint32_t len = (std::uint32_t{buf_[off]} << 24) | (std::uint32_t{buf_[off + 1]} << 16) |
                              (std::uint32_t{buf_[off + 2]} << 8) | std::uint32_t{buf_[off + 3]};
    if (len > kMaxFrameBytes) {
      throw Error(Errc::FrameTooLarge, "declared length " + std::to_string(len));
    }
    if (buf_.size() - off - kFrameHeaderBytes < len) break;
    const auto body = std::span<const std::uint8_t>(buf_).subspan(off + kFrameHeaderBytes, len);
    ready_.push_back(decode(body));
    off += kFrameHeaderBytes + len;
  }
  buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(off));
}

std::optional<Envelope> FrameAssembler::pop() {
  if (ready_.empty()) return std::nullopt;
  auto m = std::move(ready_.front());
  ready_.pop_front();
  return m;
}

}  // namespace ridelink::protocol
