// HTTP service for interactive deformation sessions.
#include <csignal>
#include <cstdio>

#include <CLI11.hpp>

#include "harmonica/service.hpp"

namespace {
harmonica::service::Server* running = nullptr;
void on_signal(int) {
  if (running) running->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harmonica-serve: interactive deformation service"};
  harmonica::service::ServerOptions options;
  int idle_minutes = 30;
  std::string ui_dir;
  app.add_option("--port", options.port, "Listen port")->check(CLI::Range(1, 65535));
  app.add_option("--host", options.host, "Listen address");
  app.add_option("--idle-timeout-min", idle_minutes, "Evict sessions idle this long")->check(CLI::PositiveNumber);
  app.add_option("--ui-dir", ui_dir, "Static viewer bundle served under /ui")->check(CLI::ExistingDirectory);
  CLI11_PARSE(app, argc, argv);

  options.idle_timeout = std::chrono::minutes(idle_minutes);
  if (!ui_dir.empty()) options.ui_dir = ui_dir;

  harmonica::service::Server server(options);
  running = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::printf("listening on %s:%d\n", options.host.c_str(), options.port);
  std::fflush(stdout);
  if (!server.listen()) {
    std::fprintf(stderr, "harmonica-serve: cannot listen on %s:%d\n", options.host.c_str(), options.port);
    return 1;
  }
  return 0;
}
