#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "ridelink/record.hpp"
#include "ridelink/transport/endpoint.hpp"
#include "ridelink/vehicle/scenario.hpp"
#include "ridelink/vehicle/state.hpp"

namespace ridelink::vehicle {

struct DriverOptions {
  transport::EndpointConfig endpoint;
  bool auto_login = false;              // send LoginSurveyRequest on every PeerConnected
  std::ostream* transcript = nullptr;   // structured records
  std::ostream* console = nullptr;      // human-readable lines
};

/// Owns the vehicle endpoint and VehicleState. Every method except the
/// *_view accessors must be called from one thread (the driver loop).
class VehicleDriver {
 public:
  explicit VehicleDriver(DriverOptions opts);
  ~VehicleDriver();

  /// Starts a fresh endpoint. Throws Error{BindFailed}.
  void connect();
  /// Stops the endpoint (both links and the listener) and processes the
  /// resulting PeerDisconnected.
  void disconnect();
  bool running() const noexcept { return endpoint_ != nullptr; }

  /// Processes inbound traffic until `pred` holds or `timeout` elapses.
  /// Returns whether `pred` held. A null predicate just pumps for `timeout`.
  bool pump_until(const std::function<bool()>& pred, std::chrono::milliseconds timeout);
  void pump(std::chrono::milliseconds d) { pump_until(nullptr, d); }

  void request_login();
  /// Throws Error{WrongState} while actuation is already blocked.
  protocol::DisengagementRequest disengage(std::optional<protocol::DisengagementRequest> seq = {});

  const VehicleState& state() const noexcept { return state_; }
  std::string status_text() const;
  std::vector<std::string> log_lines() const;

  // Safe from any thread.
  bool actuation_blocked_view() const noexcept { return blocked_view_.load(); }
  bool copilot_connected_view() const noexcept { return connected_view_.load(); }
  std::uint16_t bound_port() const noexcept { return bound_port_; }

 private:
  void handle(const transport::InboundEvent& ev);
  void send(const protocol::Envelope& msg);
  void record(std::string_view channel, std::string_view name, const Fields& fields = {});
  void say(const std::string& line);
  void check_link_status();
  void sync_views();

  DriverOptions opts_;
  std::unique_ptr<transport::Endpoint> endpoint_;
  VehicleState state_;
  std::optional<bool> last_link_up_;
  std::atomic<bool> blocked_view_{false};
  std::atomic<bool> connected_view_{false};
  std::uint16_t bound_port_ = 0;
};

struct ScenarioResult {
  bool ok = true;
  std::size_t failed_step = 0;  // index into the scenario, when !ok
  std::string reason;
};

struct ScenarioOptions {
  std::chrono::milliseconds connect_timeout{10000};
};

/// Connects, waits for the co-pilot, executes the steps on schedule and
/// disconnects. Step times are offsets from the first PeerConnected.
ScenarioResult run_scenario(const Scenario& scenario, VehicleDriver& driver, ScenarioOptions opts = {});

/// Line-command loop over `in` until `quit` or end of input.
void run_interactive(VehicleDriver& driver, std::istream& in, std::ostream& out);

}  // namespace ridelink::vehicle
