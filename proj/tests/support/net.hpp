#pragma once

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <functional>
#include <thread>

#include "ridelink/transport/endpoint.hpp"
#include "ridelink/transport/socket.hpp"

namespace ridelink::testing {

/// Asks the kernel for an unused loopback port.
inline std::uint16_t free_port() {
  auto s = transport::listen_on({"127.0.0.1", 0});
  return transport::local_port(s);
}

/// Mirrored configs for two endpoints on loopback with fast timings.
struct LoopbackPair {
  transport::EndpointConfig a;
  transport::EndpointConfig b;
};

inline LoopbackPair loopback_pair(std::uint32_t hb_interval = 50, std::uint32_t hb_timeout = 200,
                                  std::uint32_t reconnect = 100) {
  const auto pa = free_port();
  auto pb = free_port();
  while (pb == pa) pb = free_port();
  LoopbackPair p;
  p.a.local_bind_address = {"127.0.0.1", pa};
  p.a.peer_server_address = {"127.0.0.1", pb};
  p.b.local_bind_address = {"127.0.0.1", pb};
  p.b.peer_server_address = {"127.0.0.1", pa};
  for (auto* c : {&p.a, &p.b}) {
    c->heartbeat_interval_ms = hb_interval;
    c->heartbeat_timeout_ms = hb_timeout;
    c->reconnect_delay_ms = reconnect;
  }
  return p;
}

/// Polls `pred` every 5 ms until it holds or `limit` elapses; returns the
/// elapsed time on success.
inline std::optional<std::chrono::milliseconds> wait_until(const std::function<bool()>& pred,
                                                           std::chrono::milliseconds limit) {
  const auto start = std::chrono::steady_clock::now();
  for (;;) {
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    if (pred()) return elapsed;
    if (elapsed > limit) return std::nullopt;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

/// Pops events until one of type T arrives (skipping others) or timeout.
template <typename T>
bool await_event(transport::Endpoint& ep, std::chrono::milliseconds limit) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    auto ev = ep.next_event(std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now()));
    if (ev && std::holds_alternative<T>(*ev)) return true;
  }
  return false;
}

}  // namespace ridelink::testing
