#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

#include "ridelink/channel.hpp"
#include "ridelink/error.hpp"
#include "ridelink/record.hpp"
#include "ridelink/service/journal.hpp"
#include "ridelink/service/json_io.hpp"
#include "ridelink/session/core.hpp"
#include "ridelink/transport/endpoint.hpp"

namespace httplib {
class Server;
}

namespace ridelink::service {

struct ServiceConfig {
  transport::EndpointConfig endpoint;
  std::string http_host = "127.0.0.1";
  std::uint16_t http_port = 7480;  // 0 picks a free port
  std::string journal_path;        // empty: history lives in memory only
  std::string static_dir;          // optional console assets served at /
  std::chrono::milliseconds status_poll{50};
  session::SessionCore::Clock clock;  // defaults to wall time
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Push subscribers receive one formatted record per line.
using Subscriber = Channel<std::string>;

/// HTTP status for an error code.
int http_status(Errc code) noexcept;

/// Hosts SessionCore and the co-pilot Endpoint behind one executor thread.
/// API calls, transport events and status ticks are all serialized through
/// the executor's queue; nothing else touches the core.
class CopilotService {
 public:
  /// Replays the journal. Throws Error{CorruptJournal}.
  explicit CopilotService(ServiceConfig config);
  ~CopilotService();
  CopilotService(const CopilotService&) = delete;
  CopilotService& operator=(const CopilotService&) = delete;

  /// Starts the transport endpoint, the executor and (optionally) the HTTP
  /// server. Throws Error{BindFailed}.
  void start(bool with_http = true);
  void stop();

  /// Routes one API request; the same table backs the HTTP server.
  ApiResponse handle(std::string_view method, std::string_view path, const std::string& body = {});

  /// Subscribes to the push channel. The first record is a full ApiState
  /// snapshot; afterwards directives, state deltas and errors follow in order.
  std::shared_ptr<Subscriber> subscribe();
  void unsubscribe(const std::shared_ptr<Subscriber>& sub);

  std::uint16_t http_port() const noexcept { return http_port_; }
  std::uint16_t transport_port() const noexcept { return transport_port_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Runs `fn` on the executor and returns its result (or rethrows).
  template <typename F>
  std::invoke_result_t<F> execute(F fn) {
    using R = std::invoke_result_t<F>;
    auto task = std::make_shared<std::packaged_task<R()>>(std::move(fn));
    auto done = task->get_future();
    if (!tasks_.push([task] { (*task)(); })) throw Error(Errc::StreamClosed, "service is stopped");
    return done.get();
  }

 private:
  Json route(std::string_view method, std::string_view path, const std::string& body);
  Json state_json() const;
  Fields state_fields() const;
  void dispatch(const session::Effects& fx);
  void publish(const std::string& line);
  void publish_state_delta();
  void on_transport(const transport::InboundEvent& ev);
  void tick();
  void executor_loop();
  void forwarder_loop();

  ServiceConfig config_;
  std::vector<std::string> warnings_;
  session::SessionCore core_;
  Journal journal_;

  std::unique_ptr<transport::Endpoint> endpoint_;
  Channel<std::function<void()>> tasks_;
  std::thread executor_;
  std::thread forwarder_;
  std::atomic<bool> running_{false};

  std::mutex subs_mu_;
  std::vector<std::shared_ptr<Subscriber>> subs_;
  Fields published_;  // executor only

  std::unique_ptr<httplib::Server> http_;
  std::thread http_thread_;
  std::uint16_t http_port_ = 0;
  std::uint16_t transport_port_ = 0;
};

}  // namespace ridelink::service
