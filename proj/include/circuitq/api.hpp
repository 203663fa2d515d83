#pragma once

// JSON request handling shared by the HTTP service. Requests are stateless:
// each one carries its own netlist.

#include <chrono>
#include <future>
#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "circuitq/hamiltonian.hpp"
#include "circuitq/quantize.hpp"
#include "circuitq/version.hpp"

namespace circuitq::api {

using json = nlohmann::json;

/// Malformed request body (HTTP 400).
class RequestError : public Error {
 public:
  explicit RequestError(const std::string& what) : Error("bad_request", what) {}
};

struct Response {
  int status = 200;
  json body;
};

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw RequestError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw RequestError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline int require_int(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) throw RequestError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

inline std::vector<int> int_list(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_array()) throw RequestError(std::string("field '") + key + "' must be an array of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) throw RequestError(std::string("field '") + key + "' must be an array of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

inline Bindings bindings(const json& req) {
  Bindings b;
  if (!req.contains("bindings")) return b;
  const json& j = req.at("bindings");
  if (!j.is_object()) throw RequestError("field 'bindings' must be an object of numbers");
  for (const auto& [name, v] : j.items()) {
    if (!v.is_number()) throw RequestError("binding '" + name + "' must be a number");
    b[name] = v.get<double>();
  }
  return b;
}

inline SolverConfig solver(const json& req) {
  SolverConfig cfg;
  if (!req.contains("solver")) return cfg;
  const json& j = req.at("solver");
  if (!j.is_object()) throw RequestError("field 'solver' must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "root_relative_tolerance" && v.is_number()) cfg.root_relative_tolerance = v.get<double>();
    else if (key == "root_max_iterations" && v.is_number_integer()) cfg.root_max_iterations = v.get<int>();
    else if (key == "q_min" && v.is_number()) cfg.q_min = v.get<double>();
    else throw RequestError("invalid solver field '" + key + "'");
  }
  return cfg;
}

inline Analyzer analyzer(const json& req) { return Analyzer(parse_netlist(require_string(req, "netlist"))); }

}  // namespace detail

inline json to_json(const FKAChi& r) {
  json modes = json::array();
  for (std::size_t m = 0; m < r.f.size(); ++m)
    modes.push_back({{"f_Hz", r.f[m]}, {"k_Hz", r.k[m]}, {"A_Hz", r.A[m]}});
  return {{"modes", modes}, {"chi_Hz", r.chi}, {"warnings", r.warnings}};
}

inline json analyze(const json& req) {
  const auto t0 = std::chrono::steady_clock::now();
  const Bindings b = detail::bindings(req);
  const SolverConfig cfg = detail::solver(req);
  const Analyzer a = detail::analyzer(req);
  json out = to_json(a.f_k_A_chi(b, cfg));
  out["timing_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline json normal_mode(const json& req) {
  const Bindings b = detail::bindings(req);
  const SolverConfig cfg = detail::solver(req);
  const int mode = detail::require_int(req, "mode");
  const Quantity q = req.contains("quantity") ? parse_quantity(detail::require_string(req, "quantity"))
                                              : Quantity::Voltage;
  const Analyzer a = detail::analyzer(req);
  const ModeSet modes = a.find_modes(b, cfg);
  if (mode < 0 || static_cast<std::size_t>(mode) >= modes.zetas.size())
    throw BindingError("invalid_modes", "mode " + std::to_string(mode) + " is not a retained mode");
  const complex zeta = modes.zetas[static_cast<std::size_t>(mode)];
  json comps = json::array();
  for (const auto& e : a.circuit().elements) {
    const ComponentPhasor p = a.component_zpf(zeta, e.id, q, b);
    comps.push_back({{"component_id", e.id}, {"re", p.value.real()}, {"im", p.value.imag()}});
  }
  return {{"mode", mode}, {"quantity", to_string(q)}, {"f_Hz", zeta.real() / (2.0 * std::numbers::pi)},
          {"components", comps}};
}

inline json hamiltonian(const json& req) {
  const Bindings b = detail::bindings(req);
  const SolverConfig cfg = detail::solver(req);
  const std::vector<int> modes = detail::int_list(req, "modes");
  const std::vector<int> excitations = detail::int_list(req, "excitations");
  const int taylor = req.contains("taylor") ? detail::require_int(req, "taylor") : 4;
  const Analyzer a = detail::analyzer(req);
  const std::vector<double> e = eigenenergies(build_hamiltonian(a, b, modes, excitations, taylor, cfg));
  std::size_t n = e.size();
  if (req.contains("n_eigenenergies")) {
    const int k = detail::require_int(req, "n_eigenenergies");
    if (k < 1) throw RequestError("field 'n_eigenenergies' must be positive");
    n = std::min(n, static_cast<std::size_t>(k));
  }
  return {{"eigenenergies_Hz", std::vector<double>(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(n))}};
}

inline json health() { return {{"status", "ok"}, {"version", kVersion}}; }

inline json error_body(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

/// Routes one request. `path` may carry the /api or /api/v1 prefix.
inline Response handle(const std::string& method, const std::string& path, const std::string& body) {
  std::string route = path;
  for (const char* prefix : {"/api/v1", "/api"}) {
    if (route.rfind(prefix, 0) == 0) {
      route = route.substr(std::char_traits<char>::length(prefix));
      break;
    }
  }
  try {
    if (route == "/health") {
      if (method != "GET") return {405, error_body("method_not_allowed", "use GET")};
      return {200, health()};
    }
    json (*fn)(const json&) = nullptr;
    if (route == "/analyze") fn = analyze;
    else if (route == "/normal_mode") fn = normal_mode;
    else if (route == "/hamiltonian") fn = hamiltonian;
    else return {404, error_body("not_found", "unknown endpoint " + path)};
    if (method != "POST") return {405, error_body("method_not_allowed", "use POST")};
    json req;
    try {
      req = json::parse(body);
    } catch (const json::parse_error& e) {
      return {400, error_body("bad_request", std::string("invalid JSON: ") + e.what())};
    }
    if (!req.is_object()) return {400, error_body("bad_request", "request body must be a JSON object")};
    return {200, fn(req)};
  } catch (const RequestError& e) {
    return {400, error_body(e.code(), e.what())};
  } catch (const Error& e) {
    return {422, error_body(e.code(), e.what())};
  } catch (const json::exception& e) {
    return {400, error_body("bad_request", e.what())};
  } catch (const std::exception& e) {
    return {500, error_body("internal_error", e.what())};
  }
}

/// handle() with a wall-clock limit. On timeout the computation keeps
/// running on a detached thread and its result is discarded.
inline Response handle_with_timeout(const std::string& method, const std::string& path, const std::string& body,
                                    std::chrono::milliseconds timeout) {
  auto task = std::make_shared<std::packaged_task<Response()>>([=] { return handle(method, path, body); });
  std::future<Response> result = task->get_future();
  std::thread([task] { (*task)(); }).detach();
  if (result.wait_for(timeout) != std::future_status::ready)
    return {408, error_body("timeout", "analysis exceeded " + std::to_string(timeout.count()) + " ms")};
  return result.get();
}

}  // namespace circuitq::api
