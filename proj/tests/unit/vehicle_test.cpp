#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <thread>

#include "net.hpp"
#include "ridelink/error.hpp"
#include "ridelink/record.hpp"
#include "ridelink/vehicle/driver.hpp"

namespace ridelink::vehicle {
namespace {

using namespace std::chrono_literals;
using protocol::DisengagementRequest;
using protocol::DisengagementSurvey;
using protocol::EventFlag;
using protocol::EventSurvey;

DisengagementSurvey response_for(DisengagementRequest r) {
  DisengagementSurvey s;
  s.lateral_seq = r.lateral_seq;
  s.longitudinal_seq = r.longitudinal_seq;
  s.cause = protocol::DisengagementCause::IntendedAndSafe;
  s.intended_explanation = protocol::IntendedExplanation::PrivateTestArea;
  return s;
}

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::ExpectationFailed;
}

// ---- VehicleState ------------------------------------------------------------

TEST(VehicleState, DisengageUsesNextCountersAndBlocks) {
  VehicleState v;
  v.on_connected();
  EXPECT_EQ(v.disengage(), (DisengagementRequest{1, 1}));
  EXPECT_TRUE(v.actuation_blocked());
  v.on_message(response_for({1, 1}), 0);
  EXPECT_EQ(v.disengage(), (DisengagementRequest{2, 2}));
}

TEST(VehicleState, ExplicitNumbersAreSentExactly) {
  VehicleState v;
  v.on_connected();
  EXPECT_EQ(v.disengage(DisengagementRequest{5, 7}), (DisengagementRequest{5, 7}));
  v.on_message(response_for({5, 7}), 0);
  EXPECT_EQ(v.disengage(), (DisengagementRequest{6, 8}));
}

TEST(VehicleState, MatchingResponseClearsBlock) {
  VehicleState v;
  v.disengage(DisengagementRequest{2, 3});
  const auto r = v.on_message(response_for({2, 3}), 10);
  EXPECT_TRUE(r.released);
  EXPECT_FALSE(r.issue);
  EXPECT_FALSE(v.actuation_blocked());
  ASSERT_EQ(v.received_log().size(), 1u);
  EXPECT_EQ(v.received_log()[0].kind, protocol::MessageKind::DisengagementSurveyResponse);
}

TEST(VehicleState, MismatchedResponseRetainsBlock) {
  VehicleState v;
  v.disengage(DisengagementRequest{2, 3});
  const auto r = v.on_message(response_for({2, 4}), 10);
  EXPECT_FALSE(r.released);
  ASSERT_TRUE(r.issue);
  EXPECT_EQ(r.issue->code(), Errc::SequenceMismatch);
  EXPECT_TRUE(v.actuation_blocked());
  EXPECT_EQ(v.open_disengagement(), (DisengagementRequest{2, 3}));
}

TEST(VehicleState, SecondDisengageWhileBlockedIsRefused) {
  VehicleState v;
  v.disengage();
  EXPECT_EQ(error_of([&] { v.disengage(); }), Errc::WrongState);
}

TEST(VehicleState, OrphanEventSurveyIsFlagged) {
  VehicleState v;
  v.on_connected();
  const auto r = v.on_message(EventSurvey{9, {1}, {1}, {}, {}}, 0);
  ASSERT_TRUE(r.issue);
  EXPECT_EQ(r.issue->code(), Errc::OrphanEventSurvey);
  v.on_message(EventFlag{9}, 1);
  EXPECT_FALSE(v.on_message(EventSurvey{9, {1}, {1}, {}, {}}, 2).issue);
  EXPECT_EQ(v.received_log().size(), 3u);
}

TEST(VehicleState, ReconnectResetsCountersAndReissuesOpenRequest) {
  VehicleState v;
  v.on_connected();
  v.disengage();
  v.on_message(response_for({1, 1}), 0);
  v.disengage();  // {2,2} still open
  v.on_message(EventFlag{1}, 0);
  v.on_disconnected();
  EXPECT_EQ(v.on_connected(), (DisengagementRequest{2, 2}));
  EXPECT_TRUE(v.flagged_events().empty());
  v.on_message(response_for({2, 2}), 0);
  EXPECT_EQ(v.disengage(), (DisengagementRequest{3, 3}));

  VehicleState fresh;
  fresh.on_connected();
  fresh.disengage();
  fresh.on_message(response_for({1, 1}), 0);
  fresh.on_disconnected();
  EXPECT_FALSE(fresh.on_connected());
  EXPECT_EQ(fresh.disengage(), (DisengagementRequest{1, 1}));
}

TEST(VehicleState, BlockedIffOpenOverRandomTraffic) {
  std::mt19937 rng(3);
  VehicleState v;
  v.on_connected();
  for (int i = 0; i < 2000; ++i) {
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0:
        try {
          v.disengage();
        } catch (const Error&) {
        }
        break;
      case 1: {
        const auto lat = std::uniform_int_distribution<std::uint32_t>(1, 30)(rng);
        v.on_message(response_for({lat, lat}), i);
        break;
      }
      case 2:
        if (v.open_disengagement()) v.on_message(response_for(*v.open_disengagement()), i);
        break;
      default:
        v.on_message(EventFlag{static_cast<std::uint32_t>(i + 1)}, i);
    }
    ASSERT_EQ(v.actuation_blocked(), v.open_disengagement().has_value());
  }
}

// ---- scenario parsing ------------------------------------------------------------

TEST(Scenario, ParsesEveryAction) {
  const auto s = parse_scenario(
      "# header\n"
      "0 RequestLogin\n"
      "0 AwaitResponse LoginSurveyResponse 5000   # trailing comment\n"
      "\n"
      "100 RequestDisengagement\n"
      "150 RequestDisengagement 5 7\n"
      "200 ExpectEventFlag\n"
      "200 ExpectEventFlag 750\n"
      "300 Disconnect\n"
      "400 Reconnect\n");
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(s[0].action, Action(RequestLogin{}));
  EXPECT_EQ(s[1].action, Action(AwaitResponse{protocol::MessageKind::LoginSurveyResponse, 5000}));
  EXPECT_EQ(s[2].action, Action(RequestDisengagement{}));
  EXPECT_EQ(s[3].action, Action(RequestDisengagement{DisengagementRequest{5, 7}}));
  EXPECT_EQ(s[4].action, Action(ExpectEventFlag{5000}));
  EXPECT_EQ(s[5].action, Action(ExpectEventFlag{750}));
  EXPECT_EQ(s[6].action, Action(Disconnect{}));
  EXPECT_EQ(s[7].action, Action(Reconnect{}));
  EXPECT_EQ(s[7].at_ms, 400u);
  EXPECT_EQ(s[7].line, 10);
}

TEST(Scenario, EmptyFileIsEmptyScenario) {
  EXPECT_TRUE(parse_scenario("").empty());
  EXPECT_TRUE(parse_scenario("# nothing\n\n").empty());
}

TEST(Scenario, RejectsBadInput) {
  for (const char* bad : {
           "0 Fly\n",
           "x RequestLogin\n",
           "0\n",
           "0 RequestLogin now\n",
           "0 RequestDisengagement 5\n",
           "0 RequestDisengagement 0 1\n",
           "0 AwaitResponse LoginSurveyResponse\n",
           "0 AwaitResponse Nope 100\n",
           "0 ExpectEventFlag soon\n",
           "100 RequestLogin\n50 RequestLogin\n",
       }) {
    EXPECT_EQ(error_of([&] { parse_scenario(bad); }), Errc::ScenarioParseError) << bad;
  }
}

TEST(Scenario, ErrorNamesTheLine) {
  try {
    parse_scenario("0 RequestLogin\n\n5 Bogus\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

// ---- driver over loopback ---------------------------------------------------------

struct Harness {
  testing::LoopbackPair cfg = testing::loopback_pair(50, 400, 50);
  std::unique_ptr<transport::Endpoint> copilot = transport::Endpoint::start(cfg.b);
  std::ostringstream transcript;
  std::ostringstream console;

  DriverOptions options(bool auto_login = false) {
    DriverOptions o;
    o.endpoint = cfg.a;
    o.auto_login = auto_login;
    o.transcript = &transcript;
    o.console = &console;
    return o;
  }

  std::optional<protocol::Envelope> next_message(std::chrono::milliseconds limit) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      auto ev = copilot->next_event(10ms);
      if (ev) {
        if (auto* m = std::get_if<transport::MessageReceived>(&*ev)) return m->message;
      }
    }
    return std::nullopt;
  }
};

std::vector<Record> records(const std::string& text) {
  std::vector<Record> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    auto r = parse_record(line);
    EXPECT_TRUE(r) << line;
    if (r) out.push_back(*r);
  }
  return out;
}

TEST(VehicleDriver, BlockHeldUntilMatchingResponse) {
  Harness h;
  VehicleDriver d(h.options());
  d.connect();
  ASSERT_TRUE(d.pump_until([&] { return d.state().copilot_connected(); }, 3s));
  const auto req = d.disengage();
  const auto got = h.next_message(2s);
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, protocol::Envelope(req));

  h.copilot->send(response_for({req.lateral_seq, req.longitudinal_seq + 1}));
  d.pump_until([&] { return d.state().received_log().size() == 1; }, 2s);
  EXPECT_TRUE(d.actuation_blocked_view());

  h.copilot->send(response_for(req));
  EXPECT_TRUE(d.pump_until([&] { return !d.state().actuation_blocked(); }, 2s));
  EXPECT_FALSE(d.actuation_blocked_view());
  d.disconnect();

  const auto recs = records(h.transcript.str());
  std::vector<std::string> names;
  for (const auto& r : recs) names.push_back(r.channel + " " + r.name);
  const std::vector<std::string> expected = {
      "STATE connected",
      "STATE actuation_blocked",
      "TX DisengagementSurveyRequest",
      "RX DisengagementSurveyResponse",
      "STATE SEQUENCE_MISMATCH",
      "RX DisengagementSurveyResponse",
      "STATE actuation_released",
      "STATE disconnected",
  };
  EXPECT_EQ(names, expected);
}

TEST(VehicleDriver, EmptyScenarioTranscriptHasOnlyConnectAndDisconnect) {
  Harness h;
  VehicleDriver d(h.options());
  const auto result = run_scenario({}, d, {3s});
  EXPECT_TRUE(result.ok) << result.reason;
  const auto recs = records(h.transcript.str());
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].name, "connected");
  EXPECT_EQ(recs[1].name, "disconnected");
}

TEST(VehicleDriver, AwaitResponseTimesOutAsExpectationFailure) {
  Harness h;
  VehicleDriver d(h.options());
  const auto result = run_scenario(parse_scenario("0 RequestLogin\n0 AwaitResponse LoginSurveyResponse 200\n"), d, {3s});
  EXPECT_FALSE(result.ok);
  EXPECT_EQ(result.failed_step, 1u);
  EXPECT_NE(result.reason.find("EXPECTATION_FAILED"), std::string::npos);
}

TEST(VehicleDriver, NoCopilotFailsTheScenario) {
  auto cfg = testing::loopback_pair(50, 400, 50);
  VehicleDriver d({cfg.a, false, nullptr, nullptr});
  const auto result = run_scenario({}, d, {300ms});
  EXPECT_FALSE(result.ok);
}

TEST(VehicleDriver, InteractiveCommands) {
  Harness h;
  VehicleDriver d(h.options(/*auto_login=*/true));
  std::thread peer([&] {
    auto login = h.next_message(3s);
    ASSERT_TRUE(login);
    EXPECT_EQ(login->kind(), protocol::MessageKind::LoginSurveyRequest);
    h.copilot->send(protocol::LoginSurvey{"alice", "bob"});
    auto req = h.next_message(3s);
    ASSERT_TRUE(req);
    EXPECT_EQ(*req, protocol::Envelope(DisengagementRequest{5, 7}));
  });
  d.connect();
  ASSERT_TRUE(d.pump_until([&] { return d.state().received_log().size() == 1; }, 3s));

  std::istringstream script(
      "bogus\n"
      "disengage 5\n"
      "disengage 5 7\n"
      "status\n"
      "disengage\n"
      "log\n"
      "quit\n"
      "status\n");
  std::ostringstream out;
  run_interactive(d, script, out);
  peer.join();

  const auto text = out.str();
  EXPECT_NE(text.find("unknown command: bogus"), std::string::npos);
  EXPECT_NE(text.find("unknown command: disengage 5"), std::string::npos);
  EXPECT_NE(text.find("lateral_seq=5 longitudinal_seq=7"), std::string::npos);
  EXPECT_NE(text.find("actuation_blocked=true"), std::string::npos);
  EXPECT_NE(text.find("error: WRONG_STATE"), std::string::npos);
  EXPECT_NE(text.find("LoginSurveyResponse: pilot_id=alice copilot_id=bob"), std::string::npos);
  // The status after quit never runs.
  EXPECT_EQ(text.find("actuation_blocked="), text.rfind("actuation_blocked="));
  EXPECT_NE(h.console.str().find("LoginSurveyResponse: pilot_id=alice copilot_id=bob"), std::string::npos);
}

}  // namespace
}  // namespace ridelink::vehicle
