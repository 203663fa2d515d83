// Local HTTP/JSON service. Binds 127.0.0.1 by default.

#include <chrono>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "circuitq/server.hpp"

int main(int argc, char** argv) {
  std::string host = "127.0.0.1";
  int port = 8080;
  double timeout_s = 30.0;
  std::string origin = "*";
  CLI::App app{"circuitq HTTP service"};
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  app.add_option("--timeout", timeout_s, "Per-request compute timeout in seconds")->check(CLI::PositiveNumber);
  app.add_option("--cors-origin", origin, "Access-Control-Allow-Origin value");
  CLI11_PARSE(app, argc, argv);

  httplib::Server server;
  circuitq::api::install_routes(server, std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0)), origin);
  std::cerr << "listening on http://" << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}
