#include "ridelink/transport/endpoint.hpp"

#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/eventfd.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>

#include "ridelink/clock.hpp"
#include "ridelink/error.hpp"

namespace ridelink::transport {

using namespace std::chrono_literals;

void EndpointConfig::validate() const {
  if (heartbeat_interval_ms == 0 || heartbeat_timeout_ms == 0 || reconnect_delay_ms == 0) {
    throw Error(Errc::InvalidConfig, "durations must be positive");
  }
  if (heartbeat_timeout_ms <= heartbeat_interval_ms) {
    throw Error(Errc::InvalidConfig, "heartbeat_timeout_ms must exceed heartbeat_interval_ms");
  }
  if (peer_server_address.port == 0) throw Error(Errc::InvalidConfig, "peer port must be non-zero");
}

std::uint64_t StatusHandle::monotonic_now() { return monotonic_ms(); }

ConnectionStatus StatusHandle::status_at(std::uint64_t now_ms) const {
  if (!liveness_) return {};
  const auto last = liveness_->last_heartbeat_ms.load();
  if (last < 0) return {};
  const auto last_u = static_cast<std::uint64_t>(last);
  const auto age = now_ms > last_u ? now_ms - last_u : 0;
  return {age <= liveness_->timeout_ms, last_u};
}

Endpoint::Endpoint(EndpointConfig config)
    : config_(std::move(config)), liveness_(std::make_shared<StatusHandle::Liveness>()) {
  liveness_->timeout_ms = config_.heartbeat_timeout_ms;
}

std::unique_ptr<Endpoint> Endpoint::start(EndpointConfig config) {
  config.validate();
  std::unique_ptr<Endpoint> ep(new Endpoint(std::move(config)));
  ep->listener_ = listen_on(ep->config_.local_bind_address);
  ep->bound_port_ = local_port(ep->listener_);
  ep->wake_fd_ = Socket(::eventfd(0, EFD_NONBLOCK | EFD_CLOEXEC));
  ep->running_ = true;
  ep->server_thread_ = std::thread([p = ep.get()] { p->server_loop(); });
  ep->client_thread_ = std::thread([p = ep.get()] { p->client_loop(); });
  return ep;
}

Endpoint::~Endpoint() { stop(); }

void Endpoint::stop() {
  if (!running_.exchange(false)) return;
  {
    std::lock_guard lock(mu_);
    shutdown_both(client_fd_);
    shutdown_both(server_fd_);
  }
  stop_cv_.notify_all();
  wake();
  if (client_thread_.joinable()) client_thread_.join();
  if (server_thread_.joinable()) server_thread_.join();
  listener_.reset();
  {
    std::lock_guard lock(mu_);
    if (peer_connected_) {
      peer_connected_ = false;
      inbound_.push(PeerDisconnected{});
    }
  }
  inbound_.close();
}

void Endpoint::send(const protocol::Envelope& msg) {
  auto bytes = protocol::frame(msg);
  {
    std::lock_guard lock(mu_);
    if (outbound_.size() >= kOutboundQueueLimit) {
      throw Error(Errc::QueueFull, std::to_string(kOutboundQueueLimit) + " messages pending");
    }
    outbound_.push_back(std::move(bytes));
  }
  wake();
}

void Endpoint::set_heartbeats_enabled(bool enabled) noexcept {
  heartbeats_enabled_ = enabled;
  wake();
}

bool Endpoint::peer_connected() const {
  std::lock_guard lock(mu_);
  return peer_connected_;
}

std::size_t Endpoint::queued() const {
  std::lock_guard lock(mu_);
  return outbound_.size();
}

void Endpoint::wake() noexcept {
  if (!wake_fd_) return;
  const std::uint64_t one = 1;
  [[maybe_unused]] auto n = ::write(wake_fd_.fd(), &one, sizeof one);
}

bool Endpoint::sleep_unless_stopped(std::chrono::milliseconds d) {
  std::unique_lock lock(mu_);
  stop_cv_.wait_for(lock, d, [&] { return !running_.load(); });
  return running_;
}

void Endpoint::link_up(Link which) {
  std::lock_guard lock(mu_);
  (which == Link::Client ? client_up_ : server_up_) = true;
  if (client_up_ && server_up_ && !peer_connected_) {
    peer_connected_ = true;
    inbound_.push(PeerConnected{});
    for (auto& m : held_) inbound_.push(MessageReceived{std::move(m)});
    held_.clear();
  }
}

void Endpoint::link_down(Link which) {
  std::lock_guard lock(mu_);
  (which == Link::Client ? client_up_ : server_up_) = false;
  held_.clear();
  if (peer_connected_) {
    peer_connected_ = false;
    inbound_.push(PeerDisconnected{});
  }
}

void Endpoint::deliver(protocol::Envelope msg) {
  if (msg.kind() == protocol::MessageKind::Heartbeat) {
    liveness_->last_heartbeat_ms = static_cast<std::int64_t>(monotonic_ms());
    return;
  }
  std::lock_guard lock(mu_);
  if (peer_connected_) {
    inbound_.push(MessageReceived{std::move(msg)});
  } else {
    held_.push_back(std::move(msg));
  }
}

bool Endpoint::send_heartbeat(int fd) {
  try {
    SocketStream out(fd);
    protocol::write_frame(out, protocol::Heartbeat{monotonic_ms()});
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool Endpoint::flush_outbound(int fd) {
  SocketStream out(fd);
  for (;;) {
    protocol::Bytes next;
    {
      std::lock_guard lock(mu_);
      if (outbound_.empty()) return true;
      next = outbound_.front();
    }
    try {
      out.write_all(next);
    } catch (const Error&) {
      return false;
    }
    std::lock_guard lock(mu_);
    outbound_.pop_front();
  }
}

void Endpoint::client_loop() {
  const auto delay = std::chrono::milliseconds(config_.reconnect_delay_ms);
  while (running_) {
    Socket s = connect_to(config_.peer_server_address, delay);
    if (!s) {
      if (!sleep_unless_stopped(delay)) break;
      continue;
    }
    {
      std::lock_guard lock(mu_);
      if (!running_) break;
      client_fd_ = s.fd();
    }
    link_up(Link::Client);
    SocketStream in(s.fd());
    try {
      for (;;) deliver(protocol::read_frame(in));
    } catch (const Error&) {
      // closed, oversized or corrupt: drop this link only
    }
    {
      std::lock_guard lock(mu_);
      client_fd_ = -1;
    }
    s.reset();
    link_down(Link::Client);
    if (!sleep_unless_stopped(delay)) break;
  }
}

void Endpoint::server_loop() {
  Socket conn;
  protocol::FrameAssembler assembler;
  std::uint64_t next_heartbeat = 0;
  const std::uint64_t interval = config_.heartbeat_interval_ms;

  auto drop = [&] {
    if (!conn) return;
    {
      std::lock_guard lock(mu_);
      server_fd_ = -1;
    }
    conn.reset();
    link_down(Link::Server);
  };

  while (running_) {
    pollfd fds[3] = {{listener_.fd(), POLLIN, 0}, {wake_fd_.fd(), POLLIN, 0}, {conn.fd(), POLLIN, 0}};
    const nfds_t nfds = conn ? 3 : 2;
    int timeout = 100;
    if (conn && heartbeats_enabled_) {
      const auto now = monotonic_ms();
      const auto wait = next_heartbeat > now ? next_heartbeat - now : 0;
      timeout = static_cast<int>(std::min<std::uint64_t>(wait, 100));
    }
    const int rc = ::poll(fds, nfds, timeout);
    if (rc < 0 && errno != EINTR) break;
    if (!running_) break;

    if (fds[1].revents & POLLIN) {
      std::uint64_t drained = 0;
      [[maybe_unused]] auto n = ::read(wake_fd_.fd(), &drained, sizeof drained);
    }

    if (fds[0].revents & POLLIN) {
      Socket accepted(::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC));
      if (accepted) {
        drop();
        int one = 1;
        ::setsockopt(accepted.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        timeval tv{2, 0};
        ::setsockopt(accepted.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        conn = std::move(accepted);
        assembler = {};
        {
          std::lock_guard lock(mu_);
          server_fd_ = conn.fd();
        }
        link_up(Link::Server);
        next_heartbeat = 0;
      }
    }

    if (conn && nfds == 3 && (fds[2].revents & (POLLIN | POLLHUP | POLLERR))) {
      std::uint8_t buf[4096];
      const auto n = ::recv(conn.fd(), buf, sizeof buf, MSG_DONTWAIT);
      if (n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) {
        drop();
      } else if (n > 0) {
        try {
          assembler.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
          while (auto m = assembler.pop()) deliver(std::move(*m));
        } catch (const Error&) {
          drop();
        }
      }
    }

    if (conn && heartbeats_enabled_ && monotonic_ms() >= next_heartbeat) {
      if (!send_heartbeat(conn.fd())) {
        drop();
      } else {
        next_heartbeat = monotonic_ms() + interval;
      }
    }
    if (conn && !flush_outbound(conn.fd())) drop();
  }
  drop();
}

}  // namespace ridelink::transport
