#pragma once

#include <cstdint>
#include <string>

namespace ridelink {

/// Milliseconds on the steady clock since the first call in this process.
std::uint64_t monotonic_ms();

/// Wall-clock milliseconds since the Unix epoch.
std::int64_t wall_ms();

/// "2026-10-16T12:34:56.789Z"
std::string iso_timestamp(std::int64_t wall_ms);

}  // namespace ridelink
