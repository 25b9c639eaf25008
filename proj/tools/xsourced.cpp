// Serves one fixture source directory (data.xml, schema.xml, service.json) over HTTP.
#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "medley/error.hpp"
#include "medley/source.hpp"

int main(int argc, char** argv) {
  CLI::App app{"xsourced: XML data service daemon"};
  std::string dir, host = "127.0.0.1", endpoint;
  int port = 0;
  app.add_option("--dir", dir, "source directory")->required()->check(CLI::ExistingDirectory);
  app.add_option("--port", port, "listen port (0 picks one)");
  app.add_option("--host", host, "listen address");
  app.add_option("--endpoint", endpoint, "public URL reported in provenance");
  CLI11_PARSE(app, argc, argv);

  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  try {
    auto service = medley::DataService::load(dir);
    medley::SourceHttpServer server(service, endpoint);
    int bound = server.start(host, port);
    std::cout << service->name() << " listening on http://" << host << ":" << bound << std::endl;
    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.stop();
  } catch (const medley::Error& e) {
    std::cerr << "xsourced: " << e.what() << "\n";
    return e.kind() == medley::ErrorKind::Config ? 5 : 1;
  }
  return 0;
}
