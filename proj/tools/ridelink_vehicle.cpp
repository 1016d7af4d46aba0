#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ridelink/error.hpp"
#include "ridelink/vehicle/driver.hpp"
#include "transport_options.hpp"

int main(int argc, char** argv) {
  using namespace ridelink;

  CLI::App app{"Vehicle-side emulator: issues survey requests and tracks actuation blocking."};
  tools::TransportOptions transport{"127.0.0.1:7401", "127.0.0.1:7400", {}};
  std::string scenario_path;
  std::string transcript_path;
  bool no_auto_login = false;
  std::uint32_t connect_timeout_ms = 10000;
  transport.add_to(app);
  app.add_option("--scenario", scenario_path, "run a scenario file instead of the interactive loop");
  app.add_option("--transcript", transcript_path, "write structured records to this file");
  app.add_flag("--no-auto-login", no_auto_login, "interactive mode: do not request login on connect");
  app.add_option("--connect-timeout-ms", connect_timeout_ms, "scenario mode: wait this long for the co-pilot")
      ->capture_default_str();
  app.set_config("--config", "", "TOML-style config file with the same keys as the flags");
  CLI11_PARSE(app, argc, argv);

  try {
    vehicle::DriverOptions opts;
    opts.endpoint = transport.resolve();
    std::ofstream transcript;
    if (!transcript_path.empty()) {
      transcript.open(transcript_path, std::ios::out | std::ios::trunc);
      if (!transcript) {
        std::cerr << "cannot write " << transcript_path << "\n";
        return 2;
      }
      opts.transcript = &transcript;
    }
    opts.console = &std::cout;

    if (!scenario_path.empty()) {
      const auto scenario = vehicle::load_scenario(scenario_path);
      vehicle::VehicleDriver driver(opts);
      const auto result =
          vehicle::run_scenario(scenario, driver, {std::chrono::milliseconds(connect_timeout_ms)});
      if (!result.ok) {
        std::cerr << "EXPECTATION_FAILED: step " << result.failed_step << ": " << result.reason << "\n";
        return 1;
      }
      std::cout << "scenario passed (" << scenario.size() << " steps)\n";
      return 0;
    }

    opts.auto_login = !no_auto_login;
    vehicle::VehicleDriver driver(opts);
    vehicle::run_interactive(driver, std::cin, std::cout);
    return 0;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
