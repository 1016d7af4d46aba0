#include "ridelink/vehicle/driver.hpp"

#include <iostream>
#include <sstream>
#include <thread>

#include "ridelink/channel.hpp"
#include "ridelink/clock.hpp"

namespace ridelink::vehicle {

using namespace std::chrono_literals;
using protocol::DisengagementRequest;
using protocol::Envelope;

VehicleDriver::VehicleDriver(DriverOptions opts) : opts_(std::move(opts)) {}

VehicleDriver::~VehicleDriver() {
  if (endpoint_) endpoint_->stop();
}

void VehicleDriver::connect() {
  if (endpoint_) return;
  endpoint_ = transport::Endpoint::start(opts_.endpoint);
  bound_port_ = endpoint_->bound_port();
  last_link_up_.reset();
}

void VehicleDriver::disconnect() {
  if (!endpoint_) return;
  endpoint_->stop();
  while (auto ev = endpoint_->inbound().try_pop()) handle(*ev);
  endpoint_.reset();
  if (state_.copilot_connected()) handle(transport::PeerDisconnected{});
}

bool VehicleDriver::pump_until(const std::function<bool()>& pred, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (pred && pred()) return true;
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return pred ? pred() : true;
    const auto slice = std::min<std::chrono::milliseconds>(
        20ms, std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now) + 1ms);
    if (!endpoint_) {
      std::this_thread::sleep_for(slice);
      continue;
    }
    if (auto ev = endpoint_->next_event(slice)) {
      handle(*ev);
      while (auto more = endpoint_->inbound().try_pop()) handle(*more);
    }
    check_link_status();
  }
}

void VehicleDriver::handle(const transport::InboundEvent& ev) {
  if (std::holds_alternative<transport::PeerConnected>(ev)) {
    const auto reissue = state_.on_connected();
    record("STATE", "connected");
    say("co-pilot connected");
    if (opts_.auto_login) send(protocol::LoginRequest{});
    if (reissue) send(*reissue);
  } else if (std::holds_alternative<transport::PeerDisconnected>(ev)) {
    if (state_.copilot_connected()) {
      state_.on_disconnected();
      record("STATE", "disconnected");
      say("co-pilot disconnected");
    }
  } else {
    const auto& msg = std::get<transport::MessageReceived>(ev).message;
    const auto receipt = state_.on_message(msg, monotonic_ms());
    const auto& entry = state_.received_log().back();
    record("RX", protocol::to_string(msg.kind()), protocol::describe(msg));
    say(std::string(protocol::to_string(msg.kind())) + ": " + entry.content);
    if (receipt.released) {
      const auto req = std::get<protocol::DisengagementSurvey>(msg.payload).request();
      record("STATE", "actuation_released",
             {{"lateral_seq", std::to_string(req.lateral_seq)}, {"longitudinal_seq", std::to_string(req.longitudinal_seq)}});
      say("actuation released");
    }
    if (receipt.issue) {
      record("STATE", errc_name(receipt.issue->code()), {{"detail", receipt.issue->what()}});
      say(std::string("warning: ") + receipt.issue->what());
    }
  }
  sync_views();
}

void VehicleDriver::send(const Envelope& msg) {
  if (!endpoint_) throw Error(Errc::StreamClosed, "vehicle endpoint is not running");
  endpoint_->send(msg);
  record("TX", protocol::to_string(msg.kind()), protocol::describe(msg));
}

void VehicleDriver::request_login() { send(protocol::LoginRequest{}); }

DisengagementRequest VehicleDriver::disengage(std::optional<DisengagementRequest> seq) {
  if (!endpoint_) throw Error(Errc::StreamClosed, "vehicle endpoint is not running");
  const auto req = state_.disengage(seq);
  sync_views();
  record("STATE", "actuation_blocked",
         {{"lateral_seq", std::to_string(req.lateral_seq)}, {"longitudinal_seq", std::to_string(req.longitudinal_seq)}});
  send(req);
  return req;
}

std::string VehicleDriver::status_text() const {
  std::ostringstream o;
  const auto link = endpoint_ ? endpoint_->connection_status() : transport::ConnectionStatus{};
  o << "copilot_connected=" << (state_.copilot_connected() ? "true" : "false")
    << " heartbeat=" << (link.connected ? "up" : "down")
    << " actuation_blocked=" << (state_.actuation_blocked() ? "true" : "false");
  if (const auto& open = state_.open_disengagement()) {
    o << " open_disengagement=" << open->lateral_seq << "/" << open->longitudinal_seq;
  }
  o << " next_lateral_seq=" << state_.next_lateral_seq() << " next_longitudinal_seq=" << state_.next_longitudinal_seq()
    << " received=" << state_.received_log().size();
  return o.str();
}

std::vector<std::string> VehicleDriver::log_lines() const {
  std::vector<std::string> out;
  for (const auto& e : state_.received_log()) {
    out.push_back(std::to_string(e.at_ms) + " " + std::string(protocol::to_string(e.kind)) + ": " + e.content);
  }
  return out;
}

void VehicleDriver::record(std::string_view channel, std::string_view name, const Fields& fields) {
  if (opts_.transcript) *opts_.transcript << format_record(wall_ms(), channel, name, fields) << '\n' << std::flush;
}

void VehicleDriver::say(const std::string& line) {
  if (opts_.console) *opts_.console << line << '\n' << std::flush;
}

void VehicleDriver::check_link_status() {
  if (!endpoint_) return;
  const bool up = endpoint_->connection_status().connected;
  if (last_link_up_ != up) {
    if (last_link_up_.has_value() || up) say(up ? "heartbeat: up" : "heartbeat: down");
    last_link_up_ = up;
  }
}

void VehicleDriver::sync_views() {
  blocked_view_ = state_.actuation_blocked();
  connected_view_ = state_.copilot_connected();
}

// ---- scenario ----------------------------------------------------------------

ScenarioResult run_scenario(const Scenario& scenario, VehicleDriver& driver, ScenarioOptions opts) {
  ScenarioResult result;
  auto failed = [&](std::size_t i, std::string why) {
    result.ok = false;
    result.failed_step = i;
    result.reason = std::move(why);
    return result;
  };

  driver.connect();
  if (!driver.pump_until([&] { return driver.state().copilot_connected(); }, opts.connect_timeout)) {
    driver.disconnect();
    return failed(0, "co-pilot did not connect");
  }

  const auto& log = driver.state().received_log();
  std::map<protocol::MessageKind, std::size_t> cursor;  // next unconsumed log index per kind
  auto take_next = [&](protocol::MessageKind kind) {
    auto& c = cursor[kind];
    for (std::size_t i = c; i < log.size(); ++i) {
      if (log[i].kind == kind) {
        c = i + 1;
        return true;
      }
    }
    c = log.size();
    return false;
  };

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < scenario.size(); ++i) {
    const auto& step = scenario[i];
    const auto due = t0 + std::chrono::milliseconds(step.at_ms);
    const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(due - std::chrono::steady_clock::now());
    if (wait.count() > 0) driver.pump(wait);

    try {
      std::visit(
          [&](const auto& a) {
            using A = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<A, RequestLogin>) {
              driver.request_login();
            } else if constexpr (std::is_same_v<A, RequestDisengagement>) {
              driver.disengage(a.seq);
            } else if constexpr (std::is_same_v<A, ExpectEventFlag>) {
              const auto kind = protocol::MessageKind::EventFlag;
              if (!driver.pump_until([&] { return take_next(kind); }, std::chrono::milliseconds(a.timeout_ms))) {
                throw Error(Errc::ExpectationFailed, "no EventFlag within " + std::to_string(a.timeout_ms) + " ms");
              }
            } else if constexpr (std::is_same_v<A, Disconnect>) {
              driver.disconnect();
            } else if constexpr (std::is_same_v<A, Reconnect>) {
              driver.connect();
              if (!driver.pump_until([&] { return driver.state().copilot_connected(); }, opts.connect_timeout)) {
                throw Error(Errc::ExpectationFailed, "co-pilot did not reconnect");
              }
            } else {
              if (!driver.pump_until([&] { return take_next(a.kind); }, std::chrono::milliseconds(a.timeout_ms))) {
                throw Error(Errc::ExpectationFailed, "no " + std::string(protocol::to_string(a.kind)) + " within " +
                                                         std::to_string(a.timeout_ms) + " ms");
              }
            }
          },
          step.action);
    } catch (const Error& e) {
      driver.disconnect();
      return failed(i, "line " + std::to_string(step.line) + " " + std::string(action_name(step.action)) + ": " +
                           e.what());
    }
  }
  driver.disconnect();
  return result;
}

// ---- interactive -------------------------------------------------------------

namespace {

constexpr const char* kUsage =
    "commands:\n"
    "  login                 send LoginSurveyRequest\n"
    "  disengage [lat long]  block actuation and request a disengagement survey\n"
    "  status                show connection and actuation state\n"
    "  log                   list every received message\n"
    "  quit                  exit";

}  // namespace

void run_interactive(VehicleDriver& driver, std::istream& in, std::ostream& out) {
  Channel<std::string> commands;
  std::thread reader([&] {
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream first(line);
      std::string word;
      first >> word;
      commands.push(line);
      if (word == "quit") break;
    }
    commands.close();
  });

  out << kUsage << std::endl;
  driver.connect();
  for (;;) {
    driver.pump(0ms);
    auto line = commands.pop_for(20ms);
    if (!line) {
      if (commands.closed() && commands.size() == 0) break;
      continue;
    }
    std::istringstream words(*line);
    std::vector<std::string> w;
    for (std::string t; words >> t;) w.push_back(t);
    if (w.empty()) continue;
    try {
      if (w[0] == "quit") {
        break;
      } else if (w[0] == "login" && w.size() == 1) {
        driver.request_login();
        out << "LoginSurveyRequest sent" << std::endl;
      } else if (w[0] == "disengage" && (w.size() == 1 || w.size() == 3)) {
        std::optional<DisengagementRequest> seq;
        if (w.size() == 3) {
          seq = DisengagementRequest{static_cast<std::uint32_t>(std::stoul(w[1])),
                                     static_cast<std::uint32_t>(std::stoul(w[2]))};
        }
        const auto req = driver.disengage(seq);
        out << "DisengagementSurveyRequest sent lateral_seq=" << req.lateral_seq
            << " longitudinal_seq=" << req.longitudinal_seq << "; actuation blocked" << std::endl;
      } else if (w[0] == "status" && w.size() == 1) {
        out << driver.status_text() << std::endl;
      } else if (w[0] == "log" && w.size() == 1) {
        for (const auto& l : driver.log_lines()) out << l << '\n';
        out << std::flush;
      } else {
        out << "unknown command: " << *line << '\n' << kUsage << std::endl;
      }
    } catch (const Error& e) {
      out << "error: " << e.what() << std::endl;
    } catch (const std::exception&) {
      out << "error: bad arguments\n" << kUsage << std::endl;
    }
  }
  driver.disconnect();
  // Both ways out of the loop (quit, end of input) also end the reader.
  reader.join();
}

}  // namespace ridelink::vehicle
