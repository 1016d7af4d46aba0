#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ridelink/protocol/messages.hpp"

namespace ridelink::protocol {

using Bytes = std::vector<std::uint8_t>;

/// Encodes a message body (no length prefix). Validates first and throws
/// Error{InvalidMessage} on any invariant violation or if the body would
/// exceed kMaxFrameBytes. Output is canonical: equal messages give equal bytes.
Bytes encode(const Envelope& msg);

/// Total over arbitrary input: returns a valid Envelope or throws Error with
/// MalformedFrame (truncated, trailing bytes, bad presence flag), UnknownKind,
/// or InvalidMessage.
Envelope decode(std::span<const std::uint8_t> bytes);

}  // namespace ridelink::protocol
