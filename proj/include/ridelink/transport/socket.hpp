#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "ridelink/protocol/framing.hpp"

namespace ridelink::transport {

struct HostPort {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
  friend bool operator==(const HostPort&, const HostPort&) = default;
};

/// "host:port" -> HostPort; throws Error{InvalidConfig}.
HostPort parse_host_port(std::string_view text);

/// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  ~Socket() { reset(); }

  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.release();
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  explicit operator bool() const noexcept { return valid(); }

  int release() noexcept {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset() noexcept;

 private:
  int fd_ = -1;
};

/// Bound, listening TCP socket. Throws Error{BindFailed}.
Socket listen_on(const HostPort& addr, int backlog = 4);

/// Port actually bound (useful when binding port 0).
std::uint16_t local_port(const Socket& s);

/// Non-blocking connect with a deadline; returns an invalid Socket on failure.
Socket connect_to(const HostPort& addr, std::chrono::milliseconds timeout);

/// Unblocks any thread blocked in recv/send on fd without closing it.
void shutdown_both(int fd) noexcept;

/// Blocking ByteStream over a connected socket (does not own the fd).
class SocketStream final : public protocol::ByteStream {
 public:
  explicit SocketStream(int fd) noexcept : fd_(fd) {}
  std::size_t read_some(std::span<std::uint8_t> buf) override;
  void write_all(std::span<const std::uint8_t> buf) override;

 private:
  int fd_;
};

}  // namespace ridelink::transport
