#include "ridelink/vehicle/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ridelink/error.hpp"

namespace ridelink::vehicle {
namespace {

[[noreturn]] void fail(int line, const std::string& why) {
  throw Error(Errc::ScenarioParseError, "line " + std::to_string(line) + ": " + why);
}

std::uint32_t number(const std::string& s, int line, const char* what) {
  std::uint32_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) fail(line, std::string("bad ") + what + " '" + s + "'");
  return v;
}

}  // namespace

std::string_view action_name(const Action& a) noexcept {
  static constexpr std::string_view kNames[] = {"RequestLogin", "RequestDisengagement", "ExpectEventFlag",
                                                "Disconnect",   "Reconnect",            "AwaitResponse"};
  return kNames[a.index()];
}

Scenario parse_scenario(std::string_view text) {
  Scenario out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    std::vector<std::string> w;
    for (std::string t; words >> t;) w.push_back(t);
    if (w.empty()) continue;
    if (w.size() < 2) fail(line_no, "expected '<at_ms> <action> [args]'");

    ScenarioStep step;
    step.line = line_no;
    step.at_ms = number(w[0], line_no, "at_ms");
    const auto& name = w[1];
    const auto nargs = w.size() - 2;
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (nargs < lo || nargs > hi) fail(line_no, name + " takes " + std::to_string(lo) + ".." + std::to_string(hi) + " arguments");
    };

    if (name == "RequestLogin") {
      arity(0, 0);
      step.action = RequestLogin{};
    } else if (name == "RequestDisengagement") {
      if (nargs != 0 && nargs != 2) fail(line_no, "RequestDisengagement takes none or <lat> <long>");
      RequestDisengagement a;
      if (nargs == 2) {
        a.seq = protocol::DisengagementRequest{number(w[2], line_no, "lateral_seq"), number(w[3], line_no, "longitudinal_seq")};
        if (a.seq->lateral_seq == 0 || a.seq->longitudinal_seq == 0) fail(line_no, "sequence numbers start at 1");
      }
      step.action = a;
    } else if (name == "ExpectEventFlag") {
      arity(0, 1);
      ExpectEventFlag a;
      if (nargs == 1) a.timeout_ms = number(w[2], line_no, "timeout_ms");
      step.action = a;
    } else if (name == "Disconnect") {
      arity(0, 0);
      step.action = Disconnect{};
    } else if (name == "Reconnect") {
      arity(0, 0);
      step.action = Reconnect{};
    } else if (name == "AwaitResponse") {
      arity(2, 2);
      const auto kind = protocol::parse_message_kind(w[2]);
      if (!kind) fail(line_no, "unknown message kind '" + w[2] + "'");
      step.action = AwaitResponse{*kind, number(w[3], line_no, "timeout_ms")};
    } else {
      fail(line_no, "unknown action '" + name + "'");
    }

    if (!out.empty() && step.at_ms < out.back().at_ms) fail(line_no, "steps must be sorted by at_ms");
    out.push_back(std::move(step));
  }
  return out;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ScenarioParseError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace ridelink::vehicle
