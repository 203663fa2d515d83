#pragma once

// Quantum parameters of the normal modes: zero-point phase fluctuations,
// anharmonicities, Kerr matrix, component phasors and reports.

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "circuitq/constants.hpp"
#include "circuitq/error.hpp"
#include "circuitq/netlist.hpp"
#include "circuitq/parallel.hpp"
#include "circuitq/reduction.hpp"
#include "circuitq/spectrum.hpp"

namespace circuitq {

/// Quantization data of one mode.
struct ModeQuantization {
  complex zeta{};
  std::size_t ref_element = 0;
  /// Complex phase zpf per inductive element, real positive at the reference.
  std::map<std::size_t, complex> phi_zpf;
  /// A_mj per junction, Hz.
  std::map<std::size_t, double> A;
  double A_total = 0.0;
};

struct QuantizedModes {
  ModeSet spectrum;
  std::vector<ModeQuantization> modes;
  /// chi[m][n] in Hz; chi[m][m] = A_m.
  std::vector<std::vector<double>> chi;
};

/// Frequencies, loss rates, anharmonicities (Hz) and Kerr matrix of one
/// binding point.
struct FKAChi {
  std::vector<double> f, k, A;
  std::vector<std::vector<double>> chi;
  std::vector<std::string> warnings;
};

enum class Quantity { Voltage, Current, Charge, Flux };

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::Voltage: return "voltage";
    case Quantity::Current: return "current";
    case Quantity::Charge: return "charge";
    case Quantity::Flux: return "flux";
  }
  return "?";
}

inline Quantity parse_quantity(const std::string& s) {
  if (s == "voltage" || s == "V") return Quantity::Voltage;
  if (s == "current" || s == "I") return Quantity::Current;
  if (s == "charge" || s == "q") return Quantity::Charge;
  if (s == "flux" || s == "Phi") return Quantity::Flux;
  throw BindingError("unknown_quantity", "quantity must be voltage, current, charge or flux");
}

/// Single-photon coherent-state amplitude of a quantity across a component,
/// SI units, oriented from node_minus to node_plus.
struct ComponentPhasor {
  std::size_t component = 0;
  Quantity quantity = Quantity::Voltage;
  complex value{};
};

/// Numeric admittance of an element at complex frequency w.
inline complex element_admittance_value(const ReducedElement& e, complex w, const Bindings& b) {
  const double v = element_value(e, b);
  const complex i{0.0, 1.0};
  switch (e.kind) {
    case ComponentKind::Capacitor: return i * v * w;
    case ComponentKind::Inductor:
    case ComponentKind::Junction: return 1.0 / (i * v * w);
    case ComponentKind::Resistor: return complex{1.0 / v, 0.0};
    default: throw CircuitError("not_an_element", "wires and grounds carry no admittance");
  }
}

/// Circuit analysis with the per-topology symbolic work done once and cached.
/// All methods are const and safe to call concurrently.
class Analyzer {
 public:
  explicit Analyzer(const Circuit& c) : Analyzer(reduce_nodes(c)) {}
  explicit Analyzer(ReducedCircuit rc) : solver_(std::move(rc)) {}

  const ReducedCircuit& circuit() const { return solver_.circuit(); }
  const SpectrumSolver& spectrum() const { return solver_; }
  const std::set<std::string>& free_parameters() const { return circuit().free_parameters; }

  ModeSet find_modes(const Bindings& b, const SolverConfig& cfg = {}) const { return solver_.find_modes(b, cfg); }

  /// Does all per-topology symbolic work up front: admittance rationals of
  /// the inductive elements and transfer functions between every pair of
  /// inductive elements.
  void prepare() const {
    const auto ids = solver_.inductive_elements();
    for (std::size_t r : ids) {
      solver_.admittance(r);
      for (std::size_t t : ids)
        if (t != r) transfer_program(r, t);
    }
  }

  /// Zero-point phase fluctuation of a mode across an inductive element.
  double phase_zpf(complex zeta, std::size_t element, const Bindings& b) const {
    if (!is_inductive(circuit().element(element).kind))
      throw CircuitError("not_inductive", "phase zpf is defined for inductors and junctions");
    const complex dy = solver_.admittance_derivative(element, zeta, b);
    const double cm = std::abs(dy.imag()) / 2.0;
    if (!(cm > 0.0)) throw AnalysisError("zero_capacitance", "mode capacitance vanishes at this element");
    return std::sqrt(PhysicalConstants::hbar / (2.0 * zeta.real() * cm)) / PhysicalConstants::phi0;
  }

  /// Inductive element with the largest phase zpf (lowest id on ties).
  std::size_t choose_reference(complex zeta, const Bindings& b) const {
    std::optional<std::size_t> best;
    double best_phi = 0.0;
    std::string last_error;
    for (std::size_t id : solver_.inductive_elements()) {
      double phi = 0.0;
      try {
        phi = phase_zpf(zeta, id, b);
      } catch (const AnalysisError& e) {
        last_error = e.what();
        continue;
      }
      if (!best || phi > best_phi * (1.0 + 1e-9)) {
        best = id;
        best_phi = phi;
      }
    }
    if (!best) throw AnalysisError("no_reference", "no inductive element can serve as reference: " + last_error);
    return *best;
  }

  /// V_target / V_ref at angular frequency w.
  complex transfer(std::size_t ref, std::size_t target, complex w, const Bindings& b) const {
    const auto& compiled = transfer_program(ref, target);
    std::map<std::string, complex> values;
    for (const auto& [k, v] : b) values[k] = v;
    values[symbolic::frequency_symbol_name()] = w;
    return compiled.evaluate(values)[0];
  }

  /// Complex phase zpf across every inductive element, referenced to `ref`.
  std::map<std::size_t, complex> inductive_phases(complex zeta, std::size_t ref, const Bindings& b) const {
    const double phi_ref = phase_zpf(zeta, ref, b);
    std::map<std::size_t, complex> out;
    for (std::size_t id : solver_.inductive_elements())
      out[id] = id == ref ? complex{phi_ref, 0.0} : phi_ref * transfer(ref, id, zeta.real(), b);
    return out;
  }

  /// Complex phase zpf across every junction, with the reference chosen per mode.
  std::map<std::size_t, complex> junction_phases(complex zeta, const Bindings& b) const {
    const std::size_t ref = choose_reference(zeta, b);
    std::map<std::size_t, complex> out;
    for (const auto& [id, phi] : inductive_phases(zeta, ref, b))
      if (circuit().element(id).kind == ComponentKind::Junction) out[id] = phi;
    return out;
  }

  QuantizedModes quantize(const Bindings& b, const SolverConfig& cfg = {}) const {
    QuantizedModes q;
    q.spectrum = solver_.find_modes(b, cfg);
    for (const complex& zeta : q.spectrum.zetas) {
      ModeQuantization m;
      m.zeta = zeta;
      m.ref_element = choose_reference(zeta, b);
      m.phi_zpf = inductive_phases(zeta, m.ref_element, b);
      for (const auto& [id, phi] : m.phi_zpf) {
        const auto& e = circuit().element(id);
        if (e.kind != ComponentKind::Junction) continue;
        const double lj = element_value(e, b);
        const double a = PhysicalConstants::phi0 * PhysicalConstants::phi0 / (2.0 * lj * PhysicalConstants::h) *
                         std::pow(std::abs(phi), 4);
        m.A[id] = a;
        m.A_total += a;
      }
      q.modes.push_back(std::move(m));
    }
    const std::size_t n = q.modes.size();
    q.chi.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          q.chi[i][j] = q.modes[i].A_total;
          continue;
        }
        double s = 0.0;
        for (const auto& [id, a] : q.modes[i].A) s += std::sqrt(a * q.modes[j].A.at(id));
        q.chi[i][j] = 2.0 * s;
      }
    return q;
  }

  std::vector<double> anharmonicities(const Bindings& b, const SolverConfig& cfg = {}) const {
    std::vector<double> out;
    for (const auto& m : quantize(b, cfg).modes) out.push_back(m.A_total);
    return out;
  }

  std::vector<std::vector<double>> kerr(const Bindings& b, const SolverConfig& cfg = {}) const {
    return quantize(b, cfg).chi;
  }

  FKAChi f_k_A_chi(const Bindings& b, const SolverConfig& cfg = {}) const {
    const QuantizedModes q = quantize(b, cfg);
    FKAChi r;
    r.f = q.spectrum.frequencies();
    r.k = q.spectrum.loss_rates();
    for (const auto& m : q.modes) r.A.push_back(m.A_total);
    r.chi = q.chi;
    r.warnings = q.spectrum.warnings();
    return r;
  }

  /// One result per binding point, evaluated in parallel; order follows `points`.
  std::vector<FKAChi> f_k_A_chi(const std::vector<Bindings>& points, const SolverConfig& cfg = {},
                                unsigned threads = worker_count()) const {
    std::vector<FKAChi> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) { out[i] = f_k_A_chi(points[i], cfg); }, threads);
    return out;
  }

  /// Phasor of `quantity` across `component` for a mode.
  ComponentPhasor component_zpf(complex zeta, std::size_t component, Quantity quantity, const Bindings& b) const {
    const std::size_t ref = choose_reference(zeta, b);
    const double w = zeta.real();
    const complex v_ref = phase_zpf(zeta, ref, b) * PhysicalConstants::phi0 * w;
    const complex v = component == ref ? v_ref : v_ref * transfer(ref, component, w, b);
    const complex iw{0.0, w};
    ComponentPhasor p{component, quantity, {}};
    switch (quantity) {
      case Quantity::Voltage: p.value = v; break;
      case Quantity::Current: p.value = element_admittance_value(circuit().element(component), w, b) * v; break;
      case Quantity::Charge:
        p.value = element_admittance_value(circuit().element(component), w, b) * v / iw;
        break;
      case Quantity::Flux: p.value = v / iw; break;
    }
    return p;
  }

  /// Central-difference d f_m / d param in Hz per parameter unit; `delta`
  /// defaults to 1e-6 of the parameter value.
  std::vector<double> frequency_gradient(const Bindings& b, const std::string& param,
                                         std::optional<double> delta = std::nullopt,
                                         const SolverConfig& cfg = {}) const {
    auto it = b.find(param);
    if (!free_parameters().count(param) || it == b.end())
      throw BindingError("unknown_parameter", "parameter '" + param + "' is not a bound circuit parameter");
    const double h = delta.value_or(1e-6 * it->second);
    if (!(h > 0.0) || !(h < it->second)) throw BindingError("invalid_delta", "delta must lie in (0, value)");
    Bindings up = b, down = b;
    up[param] += h;
    down[param] -= h;
    const auto fu = find_modes(up, cfg).frequencies();
    const auto fd = find_modes(down, cfg).frequencies();
    if (fu.size() != fd.size())
      throw AnalysisError("mode_crossing", "mode count changes inside the finite-difference stencil");
    std::vector<double> out;
    for (std::size_t m = 0; m < fu.size(); ++m) out.push_back((fu[m] - fd[m]) / (2.0 * h));
    return out;
  }

 private:
  const symbolic::CompiledExpressions& transfer_program(std::size_t ref, std::size_t target) const {
    {
      std::lock_guard lock(mutex_);
      auto it = transfer_cache_.find({ref, target});
      if (it != transfer_cache_.end()) return *it->second;
    }
    // Built outside the lock; a concurrent duplicate build is harmless.
    auto compiled = std::make_shared<const symbolic::CompiledExpressions>(
        std::vector<Expression>{transfer_function(circuit(), ref, target)});
    std::lock_guard lock(mutex_);
    return *transfer_cache_.emplace(std::make_pair(ref, target), compiled).first->second;
  }

  SpectrumSolver solver_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const symbolic::CompiledExpressions>>
      transfer_cache_;
};

// ---------------------------------------------------------------------------
// Reports

/// Three significant digits with an SI prefix, e.g. "4.99 GHz", "94.3 Hz".
inline std::string format_si(double value, const std::string& unit = "Hz") {
  if (std::isnan(value)) return "";
  if (value == 0.0) return "0 " + unit;
  static const char* prefixes[] = {"a", "f", "p", "n", "u", "m", "", "k", "M", "G", "T", "P", "E"};
  constexpr int zero_index = 6;
  const double mag = std::abs(value);
  int exp3 = static_cast<int>(std::floor(std::log10(mag) / 3.0));
  exp3 = std::clamp(exp3, -zero_index, 6);
  // Three significant digits; rounding may carry into the next decade or prefix.
  auto digits_after_point = [](double m) { return std::max(0, 2 - static_cast<int>(std::floor(std::log10(m)))); };
  auto round3 = [&](double m) {
    const int d = digits_after_point(m);
    return std::round(m * std::pow(10.0, d)) / std::pow(10.0, d);
  };
  double mant = round3(mag / std::pow(10.0, 3 * exp3));
  if (mant >= 1000.0 && exp3 < 6) {
    ++exp3;
    mant = round3(mag / std::pow(10.0, 3 * exp3));
  }
  const int d = digits_after_point(mant);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.*f %s%s", value < 0 ? "-" : "", d, mant, prefixes[exp3 + zero_index],
                unit.c_str());
  return buf;
}

namespace detail {

inline std::string centered(const std::string& s, std::size_t width) {
  const std::size_t pad = width > s.size() ? width - s.size() : 0;
  const std::size_t left = (pad + 1) / 2;
  return std::string(left, ' ') + s + std::string(pad - left, ' ');
}

inline std::string right_cell(const std::string& s, std::size_t width) {
  const std::size_t inner = width - 1;
  return std::string(inner > s.size() ? inner - s.size() : 0, ' ') + s + " ";
}

/// Rows of cells under headers; every column is max content + 2 wide.
inline std::string render_block(const std::vector<std::string>& headers,
                                const std::vector<std::vector<std::string>>& rows) {
  const std::string label = "mode";
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    std::size_t w = headers[c].size();
    for (const auto& r : rows) w = std::max(w, r[c].size());
    width[c] = w + 2;
  }
  std::string out = label + " |";
  for (std::size_t c = 0; c < headers.size(); ++c) out += centered(headers[c], width[c]) + "|";
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string idx = std::to_string(r);
    out += std::string(label.size() > idx.size() ? label.size() - idx.size() : 0, ' ') + idx + " |";
    for (std::size_t c = 0; c < headers.size(); ++c) out += right_cell(rows[r][c], width[c]) + "|";
    out += '\n';
  }
  return out;
}

}  // namespace detail

/// Two-block text table: per-mode frequency, dissipation and anharmonicity,
/// then the lower triangle of the Kerr matrix.
inline std::string format_table(const FKAChi& r) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t m = 0; m < r.f.size(); ++m) rows.push_back({format_si(r.f[m]), format_si(r.k[m]), format_si(r.A[m])});
  std::string out = detail::render_block({"freq.", "diss.", "anha."}, rows);
  out += "\nKerr coefficients \ndiagonal = Kerr\noff-diagonal = cross-Kerr\n";
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> kerr_rows;
  for (std::size_t m = 0; m < r.chi.size(); ++m) {
    headers.push_back(std::to_string(m));
    std::vector<std::string> row;
    for (std::size_t n = 0; n < r.chi.size(); ++n) row.push_back(n <= m ? format_si(r.chi[m][n]) : "");
    kerr_rows.push_back(std::move(row));
  }
  out += detail::render_block(headers, kerr_rows);
  return out;
}

}  // namespace circuitq
