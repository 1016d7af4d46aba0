#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "generators.hpp"
#include "httplib.h"
#include "net.hpp"
#include "ridelink/record.hpp"
#include "ridelink/service/journal.hpp"
#include "ridelink/service/json_io.hpp"
#include "ridelink/service/service.hpp"

namespace ridelink::service {
namespace {

using namespace std::chrono_literals;
using protocol::DisengagementRequest;
using protocol::Envelope;

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ridelink-tests";
  std::filesystem::create_directories(dir);
  const auto p = dir / (name + "-" + std::to_string(::getpid()));
  std::filesystem::remove(p);
  return p.string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---- journal ----------------------------------------------------------------------

const std::string kLine1 = R"({"type":"DriveStarted","drive_seq":1,"pilot_id":"a","copilot_id":"b","at_ms":5})";
const std::string kLine2 = R"({"type":"SessionStarted","drive_seq":1,"session_seq":1,"at_ms":6})";
const std::string kLine3 = R"({"type":"SessionEnded","drive_seq":1,"session_seq":1,"at_ms":9})";

TEST(Journal, MissingFileIsEmptyHistory) {
  const auto loaded = Journal::load(temp_path("missing"));
  EXPECT_TRUE(loaded.events.empty());
  EXPECT_TRUE(loaded.warnings.empty());
  EXPECT_TRUE(replay(loaded.events).summaries().empty());
}

TEST(Journal, TruncatedTailIsDroppedWithWarning) {
  const auto path = temp_path("truncated");
  write_file(path, kLine1 + "\n" + kLine2 + "\n" + kLine3.substr(0, 20));
  const auto loaded = Journal::load(path);
  EXPECT_EQ(loaded.events.size(), 2u);
  ASSERT_EQ(loaded.warnings.size(), 1u);
  EXPECT_EQ(read_file(path), kLine1 + "\n" + kLine2 + "\n");

  Journal j(path);
  j.append(session::SessionEnded{1, 1, 9});
  EXPECT_EQ(Journal::load(path).events.size(), 3u);
  EXPECT_EQ(replay(Journal::load(path).events).summaries().size(), 1u);
}

TEST(Journal, CompleteLastLineWithoutNewlineIsKept) {
  const auto path = temp_path("nonl");
  write_file(path, kLine1 + "\n" + kLine2);
  const auto loaded = Journal::load(path);
  EXPECT_EQ(loaded.events.size(), 2u);
  EXPECT_TRUE(loaded.warnings.empty());
  EXPECT_EQ(read_file(path), kLine1 + "\n" + kLine2 + "\n");
}

TEST(Journal, CorruptInteriorLineThrows) {
  const auto path = temp_path("corrupt");
  write_file(path, kLine1 + "\n{\"type\":\"Nope\"}\n" + kLine3 + "\n");
  try {
    Journal::load(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CorruptJournal);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

// ---- JSON ---------------------------------------------------------------------------

TEST(JsonIo, SurveysRoundTrip) {
  testing::MessageGenerator gen(11);
  for (int i = 0; i < 1000; ++i) {
    const auto d = gen.disengagement_survey();
    EXPECT_EQ(disengagement_survey_from_json(Json::parse(to_json(d).dump()), std::nullopt), d);
    const auto e = gen.event_survey();
    EXPECT_EQ(event_survey_from_json(Json::parse(to_json(e).dump()), e.event_seq), e);
  }
}

TEST(JsonIo, HistoryEventsRoundTrip) {
  testing::MessageGenerator gen(12);
  const std::vector<session::HistoryEvent> events = {
      session::DriveStarted{1, "alice", "bob \"b\"", 100},
      session::SessionStarted{1, 1, 101},
      session::EventFlagged{1, 1, 1, 102},
      session::DisengagementSubmitted{1, 1, gen.disengagement_survey(), 103},
      session::EventSurveySubmitted{1, 1, gen.event_survey(), 104},
      session::SessionEnded{1, 1, 105},
      session::DriveEnded{1, 106},
  };
  for (const auto& ev : events) EXPECT_EQ(history_event_from_json(Json::parse(to_json(ev).dump())), ev);
}

TEST(JsonIo, MissingSeqFallsBackToOpenRequest) {
  const auto s = disengagement_survey_from_json(
      Json::parse(R"({"longitudinal_comfort":1,"lateral_comfort":2,"cause":"EndOfDrive"})"),
      DisengagementRequest{4, 5});
  EXPECT_EQ(s.request(), (DisengagementRequest{4, 5}));
}

TEST(JsonIo, BadBodiesAreBadRequest) {
  for (const char* body : {
           R"({"lateral_comfort":2,"cause":"EndOfDrive"})",
           R"({"longitudinal_comfort":"x","lateral_comfort":2,"cause":"EndOfDrive"})",
           R"({"longitudinal_comfort":1,"lateral_comfort":2,"cause":"Bored"})",
           R"([1,2])",
       }) {
    try {
      disengagement_survey_from_json(Json::parse(body), DisengagementRequest{1, 1});
      ADD_FAILURE() << body;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BadRequest) << body;
    }
  }
}

// ---- service --------------------------------------------------------------------------

struct Rig {
  testing::LoopbackPair cfg = testing::loopback_pair(50, 400, 50);
  ServiceConfig config;
  std::unique_ptr<CopilotService> svc;
  std::unique_ptr<transport::Endpoint> vehicle;

  explicit Rig(std::string journal = {}, bool http = false) {
    config.endpoint = cfg.b;
    config.http_port = 0;
    config.journal_path = std::move(journal);
    config.clock = [] { return std::int64_t{1000}; };
    svc = std::make_unique<CopilotService>(config);
    svc->start(http);
  }

  Json call(std::string_view method, std::string_view path, const std::string& body = {}, int expect = 200) {
    const auto r = svc->handle(method, path, body);
    EXPECT_EQ(r.status, expect) << method << " " << path << " -> " << r.body;
    return Json::parse(r.body);
  }

  Json state() { return call("GET", "/state"); }

  void connect_vehicle() {
    vehicle = transport::Endpoint::start(cfg.a);
    ASSERT_TRUE(testing::await_event<transport::PeerConnected>(*vehicle, 3s));
  }

  void disconnect_vehicle() {
    vehicle->stop();
    vehicle.reset();
  }

  bool wait_state(const std::function<bool(const Json&)>& pred, std::chrono::milliseconds limit = 3s) {
    return testing::wait_until([&] { return pred(state()); }, limit).has_value();
  }

  std::optional<Envelope> vehicle_receive(std::chrono::milliseconds limit = 2s) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      if (auto ev = vehicle->next_event(10ms)) {
        if (auto* m = std::get_if<transport::MessageReceived>(&*ev)) return m->message;
      }
    }
    return std::nullopt;
  }
};

std::optional<Record> next_record(Subscriber& sub, std::chrono::milliseconds limit = 2s) {
  auto line = sub.pop_for(limit);
  if (!line) return std::nullopt;
  return parse_record(*line);
}

TEST(Service, BlankLoginIsEmptyFieldAndStateUnchanged) {
  Rig rig;
  const auto before = rig.state();
  const auto err = rig.call("POST", "/login", R"({"pilot":"","copilot":"bob"})", 400);
  EXPECT_EQ(err["error"], "EMPTY_FIELD");
  EXPECT_EQ(rig.state(), before);
}

TEST(Service, ErrorCodesMapToClientErrors) {
  Rig rig;
  EXPECT_EQ(rig.call("POST", "/event/trigger", "", 409)["error"], "NOT_IN_SESSION");
  EXPECT_EQ(rig.call("POST", "/end-drive", "", 409)["error"], "NOT_IDLE");
  EXPECT_EQ(rig.call("GET", "/history/99", "", 404)["error"], "UNKNOWN_SESSION");
  EXPECT_EQ(rig.call("POST", "/event/3/save", "{}", 404)["error"], "UNKNOWN_EVENT");
  EXPECT_EQ(rig.call("GET", "/nowhere", "", 404)["error"], "NOT_FOUND");
  EXPECT_EQ(rig.call("POST", "/login", "{oops", 400)["error"], "BAD_REQUEST");
  EXPECT_EQ(rig.call("POST", "/login", R"({"pilot":1,"copilot":"b"})", 400)["error"], "BAD_REQUEST");
}

TEST(Service, PushStartsWithSnapshotThenDirectivesInOrder) {
  Rig rig;
  auto sub = rig.svc->subscribe();
  auto first = next_record(*sub);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->channel, "STATE");
  EXPECT_EQ(*first->get("drive_state"), "AwaitingLogin");

  rig.call("POST", "/login", R"({"pilot":"alice","copilot":"bob"})");
  auto d = next_record(*sub);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->channel, "DIRECTIVE");
  EXPECT_EQ(d->name, "ShowScreen");
  EXPECT_EQ(*d->get("screen"), "Dashboard");
  auto delta = next_record(*sub);
  ASSERT_TRUE(delta);
  EXPECT_EQ(delta->channel, "STATE");
  EXPECT_EQ(*delta->get("drive_state"), "DriveIdle");
  EXPECT_EQ(*delta->get("pilot_id"), "alice");
  EXPECT_EQ(delta->get("open_survey"), nullptr);  // unchanged fields are omitted
  rig.svc->unsubscribe(sub);
}

TEST(Service, VehicleDisengagementReachesPushAndTestDriveReachesVehicle) {
  Rig rig;
  rig.call("POST", "/login", R"({"pilot":"alice","copilot":"bob"})");
  auto sub = rig.svc->subscribe();
  rig.connect_vehicle();
  ASSERT_TRUE(rig.wait_state([](const Json& s) { return s["drive_state"] == "SessionActive"; }));

  const auto sent = std::chrono::steady_clock::now();
  rig.vehicle->send(DisengagementRequest{2, 3});
  std::optional<Record> open;
  while (auto r = next_record(*sub, 1s)) {
    if (r->channel == "DIRECTIVE" && r->name == "OpenDisengagementSurvey") {
      open = r;
      break;
    }
  }
  ASSERT_TRUE(open);
  EXPECT_LT(std::chrono::steady_clock::now() - sent, 1s);
  EXPECT_EQ(*open->get("lateral_seq"), "2");
  EXPECT_EQ(*open->get("longitudinal_seq"), "3");

  const auto autofill = rig.call("GET", "/disengagement/autofill");
  EXPECT_EQ(autofill["cause"], "IntendedAndSafe");
  rig.call("POST", "/disengagement/testdrive", "");
  const auto got = rig.vehicle_receive();
  ASSERT_TRUE(got);
  const auto* s = got->get_if<protocol::DisengagementSurvey>();
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->request(), (DisengagementRequest{2, 3}));
  EXPECT_EQ(s->longitudinal_comfort.value, 0);
  EXPECT_EQ(s->lateral_comfort.value, 0);
  EXPECT_EQ(s->cause, protocol::DisengagementCause::IntendedAndSafe);
  EXPECT_EQ(s->intended_explanation, protocol::IntendedExplanation::PrivateTestArea);
  EXPECT_FALSE(s->additional_info);
  EXPECT_EQ(rig.state()["current_session"]["disengagement_count"], 1);
}

TEST(Service, SubmitWithWrongEchoIsSequenceMismatch) {
  Rig rig;
  rig.call("POST", "/login", R"({"pilot":"alice","copilot":"bob"})");
  rig.connect_vehicle();
  rig.vehicle->send(DisengagementRequest{2, 3});
  ASSERT_TRUE(rig.wait_state([](const Json& s) { return !s["open_survey"].is_null(); }));
  const auto err = rig.call("POST", "/disengagement/submit",
                            R"({"lateral_seq":2,"longitudinal_seq":4,"longitudinal_comfort":1,)"
                            R"("lateral_comfort":1,"cause":"EndOfDrive"})",
                            409);
  EXPECT_EQ(err["error"], "SEQUENCE_MISMATCH");
  rig.call("POST", "/disengagement/submit", R"({"longitudinal_comfort":1,"lateral_comfort":1,"cause":"EndOfDrive"})");
  EXPECT_TRUE(rig.state()["open_survey"].is_null());
}

TEST(Service, EventCardLifecycleOverApi) {
  Rig rig;
  rig.call("POST", "/login", R"({"pilot":"alice","copilot":"bob"})");
  rig.connect_vehicle();
  ASSERT_TRUE(rig.wait_state([](const Json& s) { return s["drive_state"] == "SessionActive"; }));
  rig.call("POST", "/event/trigger", "");
  rig.call("POST", "/event/1/save", R"({"longitudinal_comfort":2})");
  const auto edit = rig.call("POST", "/event/1/edit", "");
  EXPECT_EQ(edit["draft"], Json::parse(R"({"longitudinal_comfort":2})"));
  rig.call("POST", "/event/1/submit", R"({"longitudinal_comfort":2,"lateral_comfort":3,"additional_info":"bump"})");
  rig.call("POST", "/event/feedback", R"({"long":4,"lat":5})");
  EXPECT_EQ(rig.state()["current_session"]["event_count"], 2);

  std::vector<Envelope> got;
  while (auto m = rig.vehicle_receive(500ms)) got.push_back(*m);
  const std::vector<Envelope> expected = {
      protocol::EventFlag{1},
      protocol::EventSurvey{1, {2}, {3}, std::nullopt, std::string("bump")},
      protocol::EventFlag{2},
      protocol::EventSurvey{2, {4}, {5}, std::nullopt, std::nullopt},
  };
  EXPECT_EQ(got, expected);
}

TEST(Service, HistorySurvivesRestartByteForByte) {
  const auto journal = temp_path("restart");
  std::string history, detail1, detail2;
  {
    Rig rig(journal);
    rig.call("POST", "/login", R"({"pilot":"alice","copilot":"bob"})");
    for (int session = 0; session < 2; ++session) {
      rig.connect_vehicle();
      ASSERT_TRUE(rig.wait_state([](const Json& s) { return s["drive_state"] == "SessionActive"; }));
      rig.vehicle->send(DisengagementRequest{1, 1});
      ASSERT_TRUE(rig.wait_state([](const Json& s) { return !s["open_survey"].is_null(); }));
      rig.call("POST", "/disengagement/testdrive", "");
      rig.call("POST", "/event/feedback", R"({"long":3,"lat":3})");
      rig.disconnect_vehicle();
      ASSERT_TRUE(rig.wait_state([](const Json& s) { return s["drive_state"] == "DriveIdle"; }));
    }
    history = rig.svc->handle("GET", "/history").body;
    detail1 = rig.svc->handle("GET", "/history/1/1").body;
    detail2 = rig.svc->handle("GET", "/history/2").body;
  }
  EXPECT_EQ(Json::parse(history).size(), 2u);

  Rig again(journal);
  EXPECT_EQ(again.svc->handle("GET", "/history").body, history);
  EXPECT_EQ(again.svc->handle("GET", "/history/1/1").body, detail1);
  EXPECT_EQ(again.svc->handle("GET", "/history/2").body, detail2);
  EXPECT_EQ(again.state()["drive_state"], "AwaitingLogin");
  // A new drive continues the drive numbering.
  EXPECT_EQ(again.call("POST", "/login", R"({"pilot":"c","copilot":"d"})")["state"]["drive"]["drive_seq"], 2);
}

TEST(Service, HttpApiAndPushStream) {
  Rig rig({}, /*http=*/true);
  httplib::Client client("127.0.0.1", rig.svc->http_port());
  client.set_read_timeout(3, 0);

  auto res = client.Post("/login", R"({"pilot":"","copilot":"x"})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(Json::parse(res->body)["error"], "EMPTY_FIELD");

  std::vector<std::string> lines;
  std::thread poster([&] {
    std::this_thread::sleep_for(200ms);
    httplib::Client c("127.0.0.1", rig.svc->http_port());
    auto r = c.Post("/login", R"({"pilot":"alice","copilot":"bob"})", "application/json");
    EXPECT_TRUE(r && r->status == 200);
  });
  std::string buffer;
  client.Get("/events", [&](const char* data, std::size_t n) {
    buffer.append(data, n);
    for (auto nl = buffer.find('\n'); nl != std::string::npos; nl = buffer.find('\n')) {
      lines.push_back(buffer.substr(0, nl));
      buffer.erase(0, nl + 1);
    }
    return lines.size() < 3;
  });
  poster.join();
  ASSERT_GE(lines.size(), 3u);
  const auto directive = parse_record(lines[1]);
  ASSERT_TRUE(directive);
  EXPECT_EQ(directive->channel, "DIRECTIVE");
  EXPECT_EQ(directive->name, "ShowScreen");

  res = client.Get("/state");
  ASSERT_TRUE(res);
  EXPECT_EQ(Json::parse(res->body)["drive_state"], "DriveIdle");
}

// API/state coherence: a shadow core fed the same inputs must project to the
// same GET /state after every step.
TEST(Service, StateMatchesShadowCoreOverRandomInputs) {
  Rig rig;
  session::SessionCore shadow([] { return std::int64_t{1000}; });
  std::mt19937 rng(5);
  std::uint32_t next_req = 1;

  auto projection = [](Json j) {
    j.erase("connection");
    j.erase("indicator");
    return j;
  };
  auto expect_same = [&](int step) {
    const auto want = projection(api_state(shadow, {}));
    const bool ok = rig.wait_state([&](const Json& s) { return projection(s) == want; }, 2s);
    ASSERT_TRUE(ok) << "step " << step << "\nservice: " << projection(rig.state()).dump()
                    << "\nshadow:  " << want.dump();
  };
  auto api = [&](std::string_view method, std::string path, const std::string& body, auto&& shadow_call) {
    const auto r = rig.svc->handle(method, path, body);
    std::string shadow_error;
    try {
      shadow_call();
    } catch (const Error& e) {
      shadow_error = errc_name(e.code());
    }
    if (shadow_error.empty()) {
      EXPECT_EQ(r.status, 200) << path << " " << r.body;
    } else {
      EXPECT_EQ(Json::parse(r.body)["error"], shadow_error) << path;
    }
  };

  for (int step = 0; step < 150; ++step) {
    const auto seq = std::uniform_int_distribution<std::uint32_t>(1, 3)(rng);
    const auto seq_path = "/event/" + std::to_string(seq);
    switch (std::uniform_int_distribution<int>(0, 9)(rng)) {
      case 0:
        api("POST", "/login", R"({"pilot":"p","copilot":"c"})", [&] { shadow.initiate_drive("p", "c"); });
        break;
      case 1:
        api("POST", "/end-drive", "", [&] { shadow.end_drive(); });
        break;
      case 2:
        api("POST", "/event/trigger", "", [&] { shadow.trigger_event(); });
        break;
      case 3:
        api("POST", "/event/feedback", R"({"long":1,"lat":2})", [&] { shadow.send_comfort_feedback({1}, {2}); });
        break;
      case 4:
        api("POST", seq_path + "/save", "{}", [&] { shadow.save_event_survey(seq, {}); });
        break;
      case 5:
        api("POST", seq_path + "/discard", "", [&] { shadow.discard_event_survey(seq); });
        break;
      case 6:
        api("POST", seq_path + "/submit", R"({"longitudinal_comfort":1,"lateral_comfort":1})",
            [&] { shadow.submit_event_survey({seq, {1}, {1}, std::nullopt, std::nullopt}); });
        break;
      case 7:
        api("POST", "/disengagement/testdrive", "", [&] { shadow.submit_test_drive(); });
        break;
      case 8:
        if (rig.vehicle) {
          rig.disconnect_vehicle();
          shadow.on_peer_disconnected();
        } else {
          rig.connect_vehicle();
          shadow.on_peer_connected();
        }
        break;
      default: {
        if (!rig.vehicle) break;
        const DisengagementRequest req{next_req, next_req};
        ++next_req;
        // The shadow decides; the service must agree (a rejected request
        // shows up only as an ERROR push record).
        try {
          shadow.on_disengagement_request(req);
        } catch (const Error&) {
        }
        rig.vehicle->send(req);
        break;
      }
    }
    expect_same(step);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

}  // namespace
}  // namespace ridelink::service
