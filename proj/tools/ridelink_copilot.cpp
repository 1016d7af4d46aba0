#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "ridelink/error.hpp"
#include "ridelink/service/service.hpp"
#include "transport_options.hpp"

int main(int argc, char** argv) {
  using namespace ridelink;

  CLI::App app{"Co-pilot service: session state machine, vehicle link, HTTP API and push channel."};
  tools::TransportOptions transport{"127.0.0.1:7400", "127.0.0.1:7401", {}};
  service::ServiceConfig cfg;
  transport.add_to(app);
  app.add_option("--http-host", cfg.http_host, "API bind address (loopback by default)")->capture_default_str();
  app.add_option("--http-port", cfg.http_port, "API port, 0 for any")->capture_default_str();
  app.add_option("--journal", cfg.journal_path, "history journal (JSON lines)");
  app.add_option("--static-dir", cfg.static_dir, "serve console assets from this directory");
  app.set_config("--config", "", "TOML-style config file with the same keys as the flags");
  CLI11_PARSE(app, argc, argv);

  // Block termination signals before any thread starts so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::signal(SIGPIPE, SIG_IGN);

  try {
    cfg.endpoint = transport.resolve();
    service::CopilotService svc(cfg);
    svc.start();
    std::cout << "listening http=" << cfg.http_host << ":" << svc.http_port() << " transport=" << transport.bind
              << " peer=" << transport.peer << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    std::cout << "shutting down" << std::endl;
    svc.stop();
    return 0;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
