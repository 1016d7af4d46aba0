#pragma once

#include <string>

#include "CLI11.hpp"
#include "ridelink/transport/endpoint.hpp"

namespace ridelink::tools {

// Transport flags shared by both executables. Parsed into strings first so
// that host:port errors are reported as usage errors.
struct TransportOptions {
  std::string bind;
  std::string peer;
  transport::EndpointConfig config;

  void add_to(CLI::App& app) {
    app.add_option("--bind", bind, "local server address host:port")->capture_default_str();
    app.add_option("--peer", peer, "peer server address host:port")->capture_default_str();
    app.add_option("--hb-interval-ms", config.heartbeat_interval_ms, "heartbeat interval")->capture_default_str();
    app.add_option("--hb-timeout-ms", config.heartbeat_timeout_ms, "heartbeat timeout")->capture_default_str();
    app.add_option("--reconnect-delay-ms", config.reconnect_delay_ms, "client reconnect delay")
        ->capture_default_str();
  }

  transport::EndpointConfig resolve() const {
    auto c = config;
    c.local_bind_address = transport::parse_host_port(bind);
    c.peer_server_address = transport::parse_host_port(peer);
    c.validate();
    return c;
  }
};

}  // namespace ridelink::tools
