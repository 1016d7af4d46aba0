#include "ridelink/service/service.hpp"

#include <charconv>
#include <iostream>

#include "httplib.h"
#include "ridelink/clock.hpp"

namespace ridelink::service {

using namespace std::chrono_literals;
using session::DriveState;

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::BadRequest:
    case Errc::EmptyField:
    case Errc::InvalidMessage:
      return 400;
    case Errc::NotFound:
    case Errc::UnknownEvent:
    case Errc::UnknownSession:
      return 404;
    case Errc::QueueFull:
    case Errc::StreamClosed:
      return 503;
    default:
      return 409;
  }
}

namespace {

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto next = path.find('/', pos);
    const auto part = path.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (!part.empty()) out.push_back(part);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::uint32_t path_number(std::string_view s) {
  std::uint32_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(Errc::NotFound, "'" + std::string(s) + "' is not a sequence number");
  }
  return v;
}

std::string require_string(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(Errc::BadRequest, std::string("missing field '") + key + "'");
  if (!j.at(key).is_string()) throw Error(Errc::BadRequest, std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

protocol::ComfortRating require_rating(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(Errc::BadRequest, std::string("missing field '") + key + "'");
  if (!j.at(key).is_number_integer()) throw Error(Errc::BadRequest, std::string("'") + key + "' must be an integer");
  return {static_cast<int>(std::clamp<std::int64_t>(j.at(key).get<std::int64_t>(), -1, 99))};
}

std::string field_value(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

CopilotService::CopilotService(ServiceConfig config)
    : config_(std::move(config)),
      core_([this] {
        auto loaded = config_.journal_path.empty() ? JournalLoad{} : Journal::load(config_.journal_path);
        warnings_ = std::move(loaded.warnings);
        return session::SessionCore(config_.clock, replay(loaded.events));
      }()),
      journal_(config_.journal_path) {
  for (const auto& w : warnings_) std::cerr << "warning: " << w << "\n";
}

CopilotService::~CopilotService() { stop(); }

void CopilotService::start(bool with_http) {
  if (running_) return;
  endpoint_ = transport::Endpoint::start(config_.endpoint);
  transport_port_ = endpoint_->bound_port();
  running_ = true;
  executor_ = std::thread([this] { executor_loop(); });
  forwarder_ = std::thread([this] { forwarder_loop(); });
  if (!with_http) return;

  http_ = std::make_unique<httplib::Server>();
  http_->new_task_queue = [] { return new httplib::ThreadPool(16); };
  if (!config_.static_dir.empty() && !http_->set_mount_point("/", config_.static_dir)) {
    stop();
    throw Error(Errc::InvalidConfig, "static dir " + config_.static_dir + " does not exist");
  }
  http_->Get("/events", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_ptr<Subscriber> sub;
    try {
      sub = subscribe();
    } catch (const Error& e) {
      res.status = 503;
      return;
    }
    res.set_chunked_content_provider(
        "text/plain",
        [sub](std::size_t, httplib::DataSink& sink) {
          if (auto line = sub->pop_for(250ms)) {
            const auto text = *line + "\n";
            return sink.write(text.data(), text.size());
          }
          if (sub->closed()) sink.done();
          return true;
        },
        [this, sub](bool) { unsubscribe(sub); });
  });
  auto api = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  http_->Get(".*", api);
  http_->Post(".*", api);

  if (config_.http_port == 0) {
    const int port = http_->bind_to_any_port(config_.http_host);
    if (port <= 0) {
      stop();
      throw Error(Errc::BindFailed, "http " + config_.http_host);
    }
    http_port_ = static_cast<std::uint16_t>(port);
  } else {
    if (!http_->bind_to_port(config_.http_host, config_.http_port)) {
      stop();
      throw Error(Errc::BindFailed, "http " + config_.http_host + ":" + std::to_string(config_.http_port));
    }
    http_port_ = config_.http_port;
  }
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void CopilotService::stop() {
  if (!running_.exchange(false)) return;
  {
    std::lock_guard lock(subs_mu_);
    for (auto& s : subs_) s->close();
  }
  if (http_) {
    http_->stop();
    if (http_thread_.joinable()) http_thread_.join();
  }
  endpoint_->stop();
  forwarder_.join();
  tasks_.close();
  executor_.join();
}

// ---- executor ------------------------------------------------------------------

void CopilotService::executor_loop() {
  auto next_tick = std::chrono::steady_clock::now() + config_.status_poll;
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    const auto wait = next_tick > now ? std::chrono::duration_cast<std::chrono::milliseconds>(next_tick - now) : 0ms;
    if (auto task = tasks_.pop_for(wait)) {
      (*task)();
    } else if (tasks_.closed()) {
      break;
    }
    if (std::chrono::steady_clock::now() >= next_tick) {
      tick();
      next_tick = std::chrono::steady_clock::now() + config_.status_poll;
    }
  }
}

void CopilotService::forwarder_loop() {
  for (;;) {
    auto ev = endpoint_->next_event(100ms);
    if (ev) {
      tasks_.push([this, e = std::move(*ev)] { on_transport(e); });
    } else if (endpoint_->inbound().closed() && endpoint_->inbound().size() == 0) {
      break;
    }
  }
}

void CopilotService::on_transport(const transport::InboundEvent& ev) {
  try {
    session::Effects fx;
    if (std::holds_alternative<transport::PeerConnected>(ev)) {
      fx = core_.on_peer_connected();
    } else if (std::holds_alternative<transport::PeerDisconnected>(ev)) {
      fx = core_.on_peer_disconnected();
    } else {
      fx = core_.on_message(std::get<transport::MessageReceived>(ev).message);
    }
    dispatch(fx);
  } catch (const Error& e) {
    std::cerr << "vehicle input rejected: " << e.what() << "\n";
    publish(format_record(wall_ms(), "ERROR", errc_name(e.code()), {{"detail", e.what()}}));
  }
}

void CopilotService::tick() {
  if (!endpoint_) return;
  dispatch(core_.on_connection_status(endpoint_->connection_status().connected));
}

void CopilotService::dispatch(const session::Effects& fx) {
  for (const auto& ev : fx.journal) journal_.append(ev);
  for (const auto& msg : fx.outbound) {
    try {
      endpoint_->send(msg);
    } catch (const Error& e) {
      std::cerr << "send failed: " << e.what() << "\n";
      publish(format_record(wall_ms(), "ERROR", errc_name(e.code()), {{"detail", e.what()}}));
    }
  }
  for (const auto& d : fx.directives) {
    Fields fields;
    const auto j = to_json(d);
    for (const auto& [k, v] : j.items()) {
      if (k != "directive") fields.emplace_back(k, field_value(v));
    }
    publish(format_record(wall_ms(), "DIRECTIVE", session::directive_name(d), fields));
  }
  publish_state_delta();
}

void CopilotService::publish(const std::string& line) {
  std::lock_guard lock(subs_mu_);
  for (auto& s : subs_) s->push(line);
}

void CopilotService::publish_state_delta() {
  auto now = state_fields();
  Fields delta;
  for (std::size_t i = 0; i < now.size(); ++i) {
    if (i >= published_.size() || published_[i] != now[i]) delta.push_back(now[i]);
  }
  published_ = std::move(now);
  if (!delta.empty()) publish(format_record(wall_ms(), "STATE", "ApiState", delta));
}

std::shared_ptr<Subscriber> CopilotService::subscribe() {
  if (!running_) throw Error(Errc::StreamClosed, "service is stopped");
  return execute([this] {
    auto sub = std::make_shared<Subscriber>();
    published_ = state_fields();
    sub->push(format_record(wall_ms(), "STATE", "ApiState", published_));
    std::lock_guard lock(subs_mu_);
    subs_.push_back(sub);
    return sub;
  });
}

void CopilotService::unsubscribe(const std::shared_ptr<Subscriber>& sub) {
  std::lock_guard lock(subs_mu_);
  std::erase(subs_, sub);
  sub->close();
}

// ---- state projection ------------------------------------------------------------

Fields CopilotService::state_fields() const {
  const auto* s = core_.current_session();
  const auto& d = core_.drive();
  std::string cards;
  for (auto c : core_.pending_cards()) cards += (cards.empty() ? "" : ",") + std::to_string(c);
  std::string open = "none";
  if (const auto* o = std::get_if<session::OpenDisengagement>(&core_.open_survey())) {
    open = "Disengagement:" + std::to_string(o->request.lateral_seq) + "/" + std::to_string(o->request.longitudinal_seq);
  } else if (const auto* e = std::get_if<session::OpenEvent>(&core_.open_survey())) {
    open = "Event:" + std::to_string(e->event_seq);
  }
  return {
      {"drive_state", std::string(to_string(core_.state()))},
      {"connected", core_.indicator() ? "true" : "false"},
      {"drive_seq", d ? std::to_string(d->drive_seq) : "-"},
      {"pilot_id", d ? d->pilot_id : "-"},
      {"copilot_id", d ? d->copilot_id : "-"},
      {"session_seq", s ? std::to_string(s->session_seq) : "-"},
      {"disengagement_count", s ? std::to_string(s->disengagement_count) : "-"},
      {"event_count", s ? std::to_string(s->event_count) : "-"},
      {"pending_cards", cards},
      {"open_survey", open},
  };
}

Json CopilotService::state_json() const {
  return api_state(core_, endpoint_ ? endpoint_->connection_status() : transport::ConnectionStatus{});
}

// ---- routing ---------------------------------------------------------------------

ApiResponse CopilotService::handle(std::string_view method, std::string_view path, const std::string& body) {
  try {
    if (!running_) throw Error(Errc::StreamClosed, "service is stopped");
    const auto j = execute([&] { return route(method, path, body); });
    return {200, j.dump()};
  } catch (const Error& e) {
    return {http_status(e.code()), Json{{"error", std::string(errc_name(e.code()))}, {"message", e.what()}}.dump()};
  }
}

Json CopilotService::route(std::string_view method, std::string_view path, const std::string& body) {
  const auto p = split_path(path);
  const bool get = method == "GET";
  const bool post = method == "POST";
  auto done = [&](const session::Effects& fx, Json extra = Json::object()) {
    dispatch(fx);
    Json j{{"ok", true}};
    Json dirs = Json::array();
    for (const auto& d : fx.directives) dirs.push_back(to_json(d));
    j["directives"] = std::move(dirs);
    for (auto& [k, v] : extra.items()) j[k] = v;
    j["state"] = state_json();
    return j;
  };

  if (get && p.size() == 1 && p[0] == "state") return state_json();
  if (get && !p.empty() && p[0] == "history") {
    if (p.size() == 1) {
      Json a = Json::array();
      for (const auto& s : core_.session_history()) a.push_back(to_json(s));
      return a;
    }
    if (p.size() == 2) return to_json(core_.session_detail(path_number(p[1])));
    if (p.size() == 3) return to_json(core_.session_detail(path_number(p[1]), path_number(p[2])));
  }
  if (get && p.size() == 2 && p[0] == "disengagement" && p[1] == "autofill") {
    return to_json(core_.test_drive_autofill());
  }

  if (post && p.size() == 1 && p[0] == "login") {
    const auto j = parse_body(body);
    return done(core_.initiate_drive(require_string(j, "pilot"), require_string(j, "copilot")));
  }
  if (post && p.size() == 1 && p[0] == "end-drive") return done(core_.end_drive());
  if (post && p.size() == 2 && p[0] == "disengagement") {
    if (p[1] == "testdrive") return done(core_.submit_test_drive());
    if (p[1] == "submit") {
      std::optional<protocol::DisengagementRequest> open;
      if (const auto* o = std::get_if<session::OpenDisengagement>(&core_.open_survey())) open = o->request;
      return done(core_.submit_disengagement(disengagement_survey_from_json(parse_body(body), open)));
    }
  }
  if (post && p.size() == 2 && p[0] == "event") {
    if (p[1] == "trigger") return done(core_.trigger_event());
    if (p[1] == "feedback") {
      const auto j = parse_body(body);
      return done(core_.send_comfort_feedback(require_rating(j, "long"), require_rating(j, "lat")));
    }
  }
  if (post && p.size() == 3 && p[0] == "event") {
    const auto seq = path_number(p[1]);
    if (p[2] == "save") return done(core_.save_event_survey(seq, event_draft_from_json(parse_body(body))));
    if (p[2] == "discard") return done(core_.discard_event_survey(seq));
    if (p[2] == "submit") return done(core_.submit_event_survey(event_survey_from_json(parse_body(body), seq)));
    if (p[2] == "edit") {
      auto [draft, fx] = core_.edit_event_survey(seq);
      return done(fx, Json{{"draft", to_json(draft)}});
    }
  }
  throw Error(Errc::NotFound, std::string(method) + " " + std::string(path));
}

}  // namespace ridelink::service
