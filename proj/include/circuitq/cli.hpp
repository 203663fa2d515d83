#pragma once

// Batch front-end. Exit codes: 0 success, 1 analysis error, 2 usage error.

#include <charconv>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "circuitq/api.hpp"
#include "circuitq/fixtures.hpp"
#include "circuitq/hamiltonian.hpp"
#include "circuitq/quantize.hpp"

namespace circuitq::cli {

using json = nlohmann::json;

/// Command-line usage problem (exit code 2).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("usage_error", what) {}
};

struct SweepSpec {
  std::string name;
  double start = 0.0, stop = 0.0;
  int count = 0;

  std::vector<double> values() const {
    std::vector<double> v;
    for (int i = 0; i < count; ++i)
      v.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / (count - 1));
    return v;
  }
};

inline double parse_value(const std::string& text, const std::string& what) {
  auto n = detail::parse_number(text);
  if (!n) throw UsageError("invalid number '" + text + "' in " + what);
  return n->value;
}

/// name=value
inline std::pair<std::string, double> parse_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected name=value, got '" + s + "'");
  return {s.substr(0, eq), parse_value(s.substr(eq + 1), "--set " + s)};
}

/// name=start:stop:count
inline SweepSpec parse_sweep(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected name=start:stop:count, got '" + s + "'");
  SweepSpec spec;
  spec.name = s.substr(0, eq);
  std::vector<std::string> parts;
  std::stringstream ss(s.substr(eq + 1));
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw UsageError("expected name=start:stop:count, got '" + s + "'");
  spec.start = parse_value(parts[0], "--sweep");
  spec.stop = parse_value(parts[1], "--sweep");
  try {
    std::size_t used = 0;
    spec.count = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw UsageError("sweep count must be an integer, got '" + parts[2] + "'");
  }
  if (spec.count < 1) throw UsageError("sweep count must be at least 1");
  return spec;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(p, &used));
      if (used != p.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("invalid integer list for " + what + ": '" + s + "'");
    }
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read netlist file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Shortest representation that parses back to the same double.
inline std::string number(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// Header: [param,] f0.., k0.., A0.., chi01, chi02, .., chi12, ..
inline std::string csv_header(std::size_t modes, const std::string& param = {}) {
  std::string h = param;
  auto add = [&](const std::string& s) { h += (h.empty() ? "" : ",") + s; };
  for (const char* q : {"f", "k", "A"})
    for (std::size_t m = 0; m < modes; ++m) add(q + std::to_string(m));
  for (std::size_t m = 0; m < modes; ++m)
    for (std::size_t n = m + 1; n < modes; ++n) add("chi" + std::to_string(m) + std::to_string(n));
  return h;
}

inline std::string csv_row(const FKAChi& r, std::size_t modes, const std::optional<double>& param = std::nullopt) {
  std::string row = param ? number(*param) : std::string{};
  bool first = !param;
  auto add = [&](const std::string& s) {
    row += (first ? "" : ",") + s;
    first = false;
  };
  auto cell = [&](const std::vector<double>& v, std::size_t m) { add(m < v.size() ? number(v[m]) : ""); };
  for (const auto* v : {&r.f, &r.k, &r.A})
    for (std::size_t m = 0; m < modes; ++m) cell(*v, m);
  for (std::size_t m = 0; m < modes; ++m)
    for (std::size_t n = m + 1; n < modes; ++n)
      add(m < r.chi.size() && n < r.chi[m].size() ? number(r.chi[m][n]) : "");
  return row;
}

struct Options {
  std::string netlist;
  std::vector<std::string> sets;
  std::string sweep;
  std::string format = "table";
  std::string modes = "0";
  std::string excitations;
  int taylor = 4;
  int n_eigen = 0;
  int mode = 0;
  std::string quantity = "voltage";
  double rtol = SolverConfig{}.root_relative_tolerance;
  int max_iter = SolverConfig{}.root_max_iterations;
  double q_min = SolverConfig{}.q_min;
  int min_nodes = 4, max_nodes = 14, repeats = 3;
};

inline Bindings bindings_of(const Options& o) {
  Bindings b;
  for (const auto& s : o.sets) {
    auto [name, v] = parse_assignment(s);
    b[name] = v;
  }
  return b;
}

inline SolverConfig solver_of(const Options& o) {
  SolverConfig cfg{o.rtol, o.max_iter, o.q_min};
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

inline void print_warnings(const std::vector<std::string>& w, std::ostream& err) {
  for (const auto& s : w) err << "warning: " << s << "\n";
}

inline int cmd_modes(const Options& o, std::ostream& out, std::ostream& err) {
  const Analyzer a(parse_netlist(read_file(o.netlist)));
  const FKAChi r = a.f_k_A_chi(bindings_of(o), solver_of(o));
  print_warnings(r.warnings, err);
  if (o.format == "json") out << api::to_json(r).dump(2) << "\n";
  else if (o.format == "csv") out << csv_header(r.f.size()) << "\n" << csv_row(r, r.f.size()) << "\n";
  else out << format_table(r);
  return 0;
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.sweep.empty()) throw UsageError("sweep requires --sweep name=start:stop:count");
  const SweepSpec spec = parse_sweep(o.sweep);
  const Bindings base = bindings_of(o);
  if (base.count(spec.name)) throw UsageError("'" + spec.name + "' is both set and swept");
  const Analyzer a(parse_netlist(read_file(o.netlist)));
  std::vector<Bindings> points;
  for (double v : spec.values()) {
    Bindings b = base;
    b[spec.name] = v;
    points.push_back(std::move(b));
  }
  validate_bindings(a.free_parameters(), points.front());
  const std::vector<FKAChi> rs = a.f_k_A_chi(points, solver_of(o));
  const std::vector<double> values = spec.values();
  std::size_t modes = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    modes = std::max(modes, rs[i].f.size());
    for (const auto& w : rs[i].warnings) err << "warning: " << spec.name << "=" << number(values[i]) << ": " << w << "\n";
  }
  if (o.format == "json") {
    json pts = json::array();
    for (const auto& r : rs) pts.push_back(api::to_json(r));
    out << json{{"param", spec.name}, {"values", values}, {"points", pts}}.dump(2) << "\n";
  } else if (o.format == "csv") {
    out << csv_header(modes, spec.name) << "\n";
    for (std::size_t i = 0; i < rs.size(); ++i) out << csv_row(rs[i], modes, values[i]) << "\n";
  } else {
    for (std::size_t i = 0; i < rs.size(); ++i)
      out << spec.name << " = " << number(values[i]) << "\n" << format_table(rs[i]) << "\n";
  }
  return 0;
}

inline int cmd_hamiltonian(const Options& o, std::ostream& out, std::ostream&) {
  const Analyzer a(parse_netlist(read_file(o.netlist)));
  const std::vector<int> modes = parse_int_list(o.modes, "--modes");
  const std::vector<int> exc =
      o.excitations.empty() ? std::vector<int>(modes.size(), 5) : parse_int_list(o.excitations, "--excitations");
  std::vector<double> e = eigenenergies(build_hamiltonian(a, bindings_of(o), modes, exc, o.taylor, solver_of(o)));
  if (o.n_eigen > 0 && static_cast<std::size_t>(o.n_eigen) < e.size()) e.resize(static_cast<std::size_t>(o.n_eigen));
  if (o.format == "json") {
    out << json{{"eigenenergies_Hz", e}}.dump(2) << "\n";
  } else if (o.format == "csv") {
    out << "index,energy_Hz\n";
    for (std::size_t i = 0; i < e.size(); ++i) out << i << "," << number(e[i]) << "\n";
  } else {
    for (std::size_t i = 0; i < e.size(); ++i)
      out << std::setw(4) << i << "  " << format_si(e[i]) << "  (" << format_si(e[i] - e[0]) << " above ground)\n";
  }
  return 0;
}

inline int cmd_normal_mode(const Options& o, std::ostream& out, std::ostream&) {
  json req{{"netlist", read_file(o.netlist)}, {"mode", o.mode}, {"quantity", o.quantity}};
  req["bindings"] = bindings_of(o);
  const SolverConfig cfg = solver_of(o);
  req["solver"] = {{"root_relative_tolerance", cfg.root_relative_tolerance},
                   {"root_max_iterations", cfg.root_max_iterations},
                   {"q_min", cfg.q_min}};
  const json r = api::normal_mode(req);
  if (o.format == "json") {
    out << r.dump(2) << "\n";
  } else if (o.format == "csv") {
    out << "component_id,re,im\n";
    for (const auto& c : r["components"])
      out << c["component_id"].get<std::size_t>() << "," << number(c["re"].get<double>()) << ","
          << number(c["im"].get<double>()) << "\n";
  } else {
    out << "mode " << o.mode << " at " << format_si(r["f_Hz"].get<double>()) << ", " << o.quantity << "\n";
    for (const auto& c : r["components"])
      out << std::setw(4) << c["component_id"].get<std::size_t>() << "  " << std::setprecision(6)
          << std::abs(complex{c["re"].get<double>(), c["im"].get<double>()}) << "  arg "
          << std::arg(complex{c["re"].get<double>(), c["im"].get<double>()}) << "\n";
  }
  return 0;
}

struct BenchRow {
  int nodes = 0;
  bool resistors = false;
  double init_ms = 0.0;
};

/// Topology-initialization time of the multi-mode ladder versus node count
/// (median of `repeats`).
inline std::vector<BenchRow> run_bench(int min_nodes, int max_nodes, int repeats) {
  std::vector<BenchRow> rows;
  for (bool res : {false, true})
    for (int nodes = min_nodes; nodes <= max_nodes; ++nodes) {
      const std::string text = fixtures::mmusc_netlist(nodes - 2, res);
      std::vector<double> t;
      for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const Analyzer a(parse_netlist(text));
        a.prepare();
        t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      }
      std::sort(t.begin(), t.end());
      rows.push_back({nodes, res, t[t.size() / 2]});
    }
  return rows;
}

inline int cmd_bench(const Options& o, std::ostream& out, std::ostream&) {
  if (o.min_nodes < 3 || o.max_nodes < o.min_nodes || o.repeats < 1)
    throw UsageError("need 3 <= min-nodes <= max-nodes and repeats >= 1");
  const auto rows = run_bench(o.min_nodes, o.max_nodes, o.repeats);
  if (o.format == "json") {
    json j = json::array();
    for (const auto& r : rows) j.push_back({{"nodes", r.nodes}, {"resistors", r.resistors}, {"init_ms", r.init_ms}});
    out << j.dump(2) << "\n";
  } else {
    out << "nodes,resistors,init_ms\n";
    for (const auto& r : rows) out << r.nodes << "," << (r.resistors ? 1 : 0) << "," << number(r.init_ms) << "\n";
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Lumped superconducting circuit analysis"};
  app.require_subcommand(1);
  const std::vector<std::string> formats{"table", "json", "csv"};

  auto common = [&](CLI::App* sub) {
    sub->add_option("netlist", o.netlist, "Netlist file")->required();
    sub->add_option("--set", o.sets, "Bind a parameter, name=value (repeatable)");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember(formats));
    sub->add_option("--rtol", o.rtol, "Root relative tolerance");
    sub->add_option("--max-iter", o.max_iter, "Maximum Halley iterations");
    sub->add_option("--q-min", o.q_min, "Minimum quality factor of retained modes");
  };
  CLI::App* modes = app.add_subcommand("modes", "Frequencies, loss rates, anharmonicities and Kerr matrix");
  common(modes);
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one parameter");
  common(sweep);
  sweep->add_option("--sweep", o.sweep, "name=start:stop:count")->required();
  CLI::App* ham = app.add_subcommand("hamiltonian", "Eigenenergies of the Taylor-expanded Hamiltonian");
  common(ham);
  ham->add_option("--modes", o.modes, "Comma-separated mode indices");
  ham->add_option("--excitations", o.excitations, "Comma-separated Fock dimensions per mode");
  ham->add_option("--taylor", o.taylor, "Taylor order of the cosine (even, >= 4)");
  ham->add_option("--n", o.n_eigen, "Number of eigenenergies to print");
  CLI::App* nm = app.add_subcommand("normal-mode", "Zero-point fluctuations of every component");
  common(nm);
  nm->add_option("--mode", o.mode, "Mode index");
  nm->add_option("--quantity", o.quantity, "voltage, current, charge or flux")
      ->check(CLI::IsMember({"voltage", "current", "charge", "flux"}));
  CLI::App* bench = app.add_subcommand("bench", "Initialization time versus node count (CSV)");
  bench->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"table", "csv", "json"}));
  bench->add_option("--min-nodes", o.min_nodes, "Smallest circuit");
  bench->add_option("--max-nodes", o.max_nodes, "Largest circuit");
  bench->add_option("--repeats", o.repeats, "Timings per size (median reported)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  auto fail = [&](int code, const std::string& id, const std::string& msg) {
    if (o.format == "json") out << api::error_body(id, msg).dump(2) << "\n";
    err << "error: " << msg << "\n";
    return code;
  };
  try {
    if (modes->parsed()) return cmd_modes(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
    if (ham->parsed()) return cmd_hamiltonian(o, out, err);
    if (nm->parsed()) return cmd_normal_mode(o, out, err);
    return cmd_bench(o, out, err);
  } catch (const UsageError& e) {
    return fail(2, e.code(), e.what());
  } catch (const BindingError& e) {
    return fail(2, e.code(), e.what());
  } catch (const Error& e) {
    return fail(1, e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal_error", e.what());
  }
}

}  // namespace circuitq::cli
