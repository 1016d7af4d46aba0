#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ridelink/channel.hpp"
#include "ridelink/protocol/codec.hpp"
#include "ridelink/transport/socket.hpp"

namespace ridelink::transport {

inline constexpr std::size_t kOutboundQueueLimit = 1024;

struct EndpointConfig {
  HostPort peer_server_address{"127.0.0.1", 7401};
  HostPort local_bind_address{"127.0.0.1", 7400};
  std::uint32_t heartbeat_interval_ms = 500;
  std::uint32_t heartbeat_timeout_ms = 2000;
  std::uint32_t reconnect_delay_ms = 1000;

  /// Throws Error{InvalidConfig} unless all durations are positive and
  /// timeout > interval.
  void validate() const;
};

struct ConnectionStatus {
  bool connected = false;
  std::optional<std::uint64_t> last_heartbeat_received_ms;
  friend bool operator==(const ConnectionStatus&, const ConnectionStatus&) = default;
};

struct PeerConnected {
  friend bool operator==(const PeerConnected&, const PeerConnected&) = default;
};
struct PeerDisconnected {
  friend bool operator==(const PeerDisconnected&, const PeerDisconnected&) = default;
};
struct MessageReceived {
  protocol::Envelope message;
  friend bool operator==(const MessageReceived&, const MessageReceived&) = default;
};

using InboundEvent = std::variant<MessageReceived, PeerConnected, PeerDisconnected>;

/// Shared, read-only view of heartbeat recency. Cheap to copy, safe to read
/// from any thread, and outlives the endpoint that produced it.
class StatusHandle {
 public:
  struct Liveness {
    std::atomic<std::int64_t> last_heartbeat_ms{-1};
    std::uint32_t timeout_ms = 0;
  };

  StatusHandle() = default;
  explicit StatusHandle(std::shared_ptr<const Liveness> l) : liveness_(std::move(l)) {}

  ConnectionStatus status() const { return status_at(monotonic_now()); }
  ConnectionStatus status_at(std::uint64_t now_ms) const;

 private:
  static std::uint64_t monotonic_now();
  std::shared_ptr<const Liveness> liveness_;
};

inline ConnectionStatus connection_status(const StatusHandle& h) { return h.status(); }

/// One side of the dual-link topology: a client that keeps connecting to the
/// peer's server, and a server that accepts the peer's client. Outbound
/// messages and heartbeats travel on the accepted link; both links are read.
///
/// PeerConnected is emitted when both links are up, PeerDisconnected when
/// either drops. Heartbeats only update the StatusHandle; they never appear
/// on the inbound stream.
class Endpoint {
 public:
  /// Validates the config, binds the listener (Error{BindFailed}) and starts
  /// the background workers.
  static std::unique_ptr<Endpoint> start(EndpointConfig config);

  ~Endpoint();
  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  /// Closes both links and the listener, emits a final PeerDisconnected if
  /// needed and closes the inbound stream. Idempotent.
  void stop();

  /// Validates and enqueues. Throws InvalidMessage or QueueFull.
  void send(const protocol::Envelope& msg);

  std::optional<InboundEvent> next_event(std::chrono::milliseconds timeout) {
    return inbound_.pop_for(timeout);
  }
  Channel<InboundEvent>& inbound() noexcept { return inbound_; }

  StatusHandle status_handle() const { return StatusHandle(liveness_); }
  ConnectionStatus connection_status() const { return status_handle().status(); }

  /// Stops/resumes heartbeat emission while leaving both sockets open.
  void set_heartbeats_enabled(bool enabled) noexcept;

  bool peer_connected() const;
  std::size_t queued() const;
  std::uint16_t bound_port() const noexcept { return bound_port_; }
  const EndpointConfig& config() const noexcept { return config_; }

 private:
  enum class Link { Client, Server };

  explicit Endpoint(EndpointConfig config);

  void client_loop();
  void server_loop();
  void link_up(Link which);
  void link_down(Link which);
  void deliver(protocol::Envelope msg);
  bool flush_outbound(int fd);
  bool send_heartbeat(int fd);
  void wake() noexcept;
  bool sleep_unless_stopped(std::chrono::milliseconds d);

  EndpointConfig config_;
  std::shared_ptr<StatusHandle::Liveness> liveness_;
  Channel<InboundEvent> inbound_;

  mutable std::mutex mu_;
  std::condition_variable stop_cv_;
  bool client_up_ = false;
  bool server_up_ = false;
  bool peer_connected_ = false;
  int client_fd_ = -1;
  int server_fd_ = -1;
  std::deque<protocol::Bytes> outbound_;
  std::vector<protocol::Envelope> held_;

  Socket listener_;
  Socket wake_fd_;
  std::uint16_t bound_port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<bool> heartbeats_enabled_{true};
  std::thread client_thread_;
  std::thread server_thread_;
};

}  // namespace ridelink::transport
