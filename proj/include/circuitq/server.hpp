#pragma once

// Route table for the HTTP service, kept in a header so tests can mount it
// on their own httplib::Server.

#include <chrono>
#include <string>

#include "circuitq/api.hpp"

// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen.
#include <httplib.h>

namespace circuitq::api {

inline void install_routes(httplib::Server& server, std::chrono::milliseconds timeout,
                           const std::string& origin = "*") {
  server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  auto route = [timeout](const httplib::Request& req, httplib::Response& res) {
    const Response r = handle_with_timeout(req.method, req.path, req.body, timeout);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(R"(/api(/v1)?/.*)", route);
  server.Post(R"(/api(/v1)?/.*)", route);
  server.Put(R"(/api(/v1)?/.*)", route);
  server.Delete(R"(/api(/v1)?/.*)", route);
  server.Options(R"(/api(/v1)?/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

}  // namespace circuitq::api
