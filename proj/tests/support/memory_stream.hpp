#pragma once

#include <algorithm>
#include <deque>

#include "ridelink/protocol/framing.hpp"

namespace ridelink::testing {

/// Single-threaded in-memory pipe. read_some hands out at most `chunk` bytes
/// per call so framing code sees arbitrary partial reads.
class MemoryStream final : public protocol::ByteStream {
 public:
  explicit MemoryStream(std::size_t chunk = 1 << 20) : chunk_(chunk) {}

  std::size_t read_some(std::span<std::uint8_t> buf) override {
    const auto n = std::min({buf.size(), chunk_, data_.size()});
    std::copy_n(data_.begin(), n, buf.begin());
    data_.erase(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(n));
    ++reads_;
    return n;
  }

  void write_all(std::span<const std::uint8_t> buf) override { data_.insert(data_.end(), buf.begin(), buf.end()); }

  void put(std::initializer_list<std::uint8_t> bytes) { data_.insert(data_.end(), bytes); }
  std::size_t pending() const { return data_.size(); }
  std::size_t reads() const { return reads_; }

 private:
  std::size_t chunk_;
  std::deque<std::uint8_t> data_;
  std::size_t reads_ = 0;
};

}  // namespace ridelink::testing
