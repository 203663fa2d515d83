#pragma once

// Normal modes of the linearized circuit: roots of det Y(w).

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "circuitq/error.hpp"
#include "circuitq/netlist.hpp"
#include "circuitq/reduction.hpp"
#include "circuitq/symbolic/berkowitz.hpp"
#include "circuitq/symbolic/parameter_polynomial.hpp"
#include "circuitq/symbolic/rational.hpp"
#include "circuitq/symbolic/roots.hpp"

namespace circuitq {

using symbolic::complex;
using symbolic::OmegaPolynomial;
using symbolic::ParameterPolynomial;
using symbolic::RationalFunction;

/// Relative level below which a bound coefficient counts as cancelled.
inline constexpr double kCancellationTolerance = 1e-26;

/// Element value (H, F or Ohm) as a parameter polynomial.
inline ParameterPolynomial element_value_polynomial(const ReducedElement& e) {
  if (!e.value.is_symbol()) {
    const double v = e.value.energy_mode ? josephson_inductance_from_energy(e.value.number()) : e.value.number();
    return ParameterPolynomial(v);
  }
  if (e.value.energy_mode) {
    constexpr double k = PhysicalConstants::phi0 * PhysicalConstants::phi0 / PhysicalConstants::h;
    return ParameterPolynomial(k) * ParameterPolynomial::symbol(e.value.name(), -1);
  }
  return ParameterPolynomial::symbol(e.value.name());
}

/// w * Y of one element: i C w^2, -i/L or w/R.
inline OmegaPolynomial scaled_element_admittance(const ReducedElement& e) {
  const ParameterPolynomial v = element_value_polynomial(e);
  const complex i{0.0, 1.0};
  switch (e.kind) {
    case ComponentKind::Capacitor: return OmegaPolynomial::monomial(ParameterPolynomial(i) * v, 2);
    case ComponentKind::Inductor:
    case ComponentKind::Junction: return OmegaPolynomial(ParameterPolynomial(-i) * v.inverse_monomial());
    case ComponentKind::Resistor: return OmegaPolynomial::monomial(v.inverse_monomial(), 1);
    default: throw CircuitError("not_an_element", "wires and grounds carry no admittance");
  }
}

/// Grounded nodal admittance matrix, every entry multiplied by w.
struct AdmittanceMatrix {
  std::vector<std::vector<OmegaPolynomial>> entries;
  int ground_node = 0;
  /// Canonical index of each row/column.
  std::vector<int> nodes;

  std::size_t size() const { return nodes.size(); }
  Expression expression(std::size_t r, std::size_t c) const { return symbolic::to_expression(entries[r][c]); }
};

/// Node touched by the most components; ties go to the lowest index.
inline int choose_ground(const ReducedCircuit& rc) {
  std::vector<int> count(static_cast<std::size_t>(rc.node_count), 0);
  for (const auto& e : rc.elements) {
    ++count[static_cast<std::size_t>(e.node_minus)];
    ++count[static_cast<std::size_t>(e.node_plus)];
  }
  return static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
}

inline AdmittanceMatrix build_admittance_matrix(const ReducedCircuit& rc) {
  if (rc.node_count < 2) throw CircuitError("too_few_nodes", "admittance matrix needs at least two nodes");
  AdmittanceMatrix am;
  am.ground_node = choose_ground(rc);
  for (int n = 0; n < rc.node_count; ++n)
    if (n != am.ground_node) am.nodes.push_back(n);
  const std::size_t n = am.nodes.size();
  am.entries.assign(n, std::vector<OmegaPolynomial>(n));
  auto row = [&](int node) -> std::optional<std::size_t> {
    if (node == am.ground_node) return std::nullopt;
    return static_cast<std::size_t>(std::find(am.nodes.begin(), am.nodes.end(), node) - am.nodes.begin());
  };
  for (const auto& e : rc.elements) {
    const OmegaPolynomial y = scaled_element_admittance(e);
    const auto a = row(e.node_minus), b = row(e.node_plus);
    if (a) am.entries[*a][*a] = am.entries[*a][*a] + y;
    if (b) am.entries[*b][*b] = am.entries[*b][*b] + y;
    if (a && b) {
      am.entries[*a][*b] = am.entries[*a][*b] - y;
      am.entries[*b][*a] = am.entries[*b][*a] - y;
    }
  }
  return am;
}

/// det(w Y(w)) as a polynomial in w.
inline OmegaPolynomial characteristic_polynomial(const AdmittanceMatrix& am) {
  OmegaPolynomial det = symbolic::berkowitz_determinant(am.entries);
  if (det.is_zero()) throw AnalysisError("zero_determinant", "determinant vanishes identically");
  return det;
}

/// Coefficients of a parameter-dependent polynomial after binding, with
/// cancellation noise set to exactly zero.
inline std::vector<complex> bind_polynomial(const OmegaPolynomial& p, const Bindings& b,
                                            double tolerance = kCancellationTolerance) {
  std::vector<complex> out;
  out.reserve(p.coefficients().size());
  for (const auto& c : p.coefficients()) {
    const symbolic::BoundValue v = c.evaluate(b, tolerance);
    out.push_back(v.cancelled(tolerance) ? complex{} : v.value);
  }
  while (!out.empty() && out.back() == complex{}) out.pop_back();
  return out;
}

/// Rejects missing and unknown parameter names.
inline void validate_bindings(const std::set<std::string>& free_parameters, const Bindings& b) {
  for (const auto& p : free_parameters)
    if (!b.count(p)) throw BindingError("unbound_symbol", "parameter '" + p + "' is not bound");
  for (const auto& [name, v] : b) {
    if (!free_parameters.count(name))
      throw BindingError("unknown_parameter", "parameter '" + name + "' does not appear in the circuit");
    if (!std::isfinite(v) || v <= 0.0)
      throw BindingError("nonpositive_value", "parameter '" + name + "' must be positive and finite");
  }
}

struct SolverConfig {
  double root_relative_tolerance = 1e-11;
  int root_max_iterations = 100;
  double q_min = 1.0;

  void validate() const {
    if (!(root_relative_tolerance > 0.0 && root_relative_tolerance < 1e-3))
      throw BindingError("invalid_config", "root_relative_tolerance must lie in (0, 1e-3)");
    if (root_max_iterations <= 0) throw BindingError("invalid_config", "root_max_iterations must be positive");
    if (!(q_min > 0.0)) throw BindingError("invalid_config", "q_min must be positive");
  }
};

enum class RootFate { Retained, Duplicate, NegativePart, ZeroFrequency, SignTest, SubQMin };

inline const char* to_string(RootFate f) {
  switch (f) {
    case RootFate::Retained: return "retained";
    case RootFate::Duplicate: return "duplicate";
    case RootFate::NegativePart: return "negative part";
    case RootFate::ZeroFrequency: return "zero frequency";
    case RootFate::SignTest: return "Y' sign test";
    case RootFate::SubQMin: return "sub-q_min";
  }
  return "?";
}

struct RootDiagnostic {
  complex root{};
  RootFate fate = RootFate::Retained;
  /// The discard was not routine (the user should look at it).
  bool warning = false;
  std::string detail;
};

struct ModeSet {
  /// zeta_m = w_m + i kappa_m / 2, ascending real part.
  std::vector<complex> zetas;
  std::vector<RootDiagnostic> diagnostics;

  std::size_t size() const { return zetas.size(); }
  /// Re(zeta)/2pi in Hz.
  std::vector<double> frequencies() const {
    std::vector<double> out;
    for (const auto& z : zetas) out.push_back(z.real() / (2.0 * std::numbers::pi));
    return out;
  }
  /// kappa/2pi = 2 Im(zeta)/2pi in Hz.
  std::vector<double> loss_rates() const {
    std::vector<double> out;
    for (const auto& z : zetas) out.push_back(2.0 * z.imag() / (2.0 * std::numbers::pi));
    return out;
  }
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (const auto& d : diagnostics)
      if (d.warning) out.push_back(d.detail);
    return out;
  }
};

/// Per-topology state: the characteristic polynomial and, lazily, the
/// admittance across each element as a rational function. Safe for
/// concurrent use.
class SpectrumSolver {
 public:
  explicit SpectrumSolver(ReducedCircuit rc)
      : rc_(std::move(rc)), matrix_(build_admittance_matrix(rc_)), poly_(circuitq::characteristic_polynomial(matrix_)) {}

  const ReducedCircuit& circuit() const { return rc_; }
  const AdmittanceMatrix& admittance_matrix() const { return matrix_; }
  const OmegaPolynomial& characteristic_polynomial() const { return poly_; }

  std::vector<std::size_t> inductive_elements() const {
    std::vector<std::size_t> out;
    for (const auto& e : rc_.elements)
      if (is_inductive(e.kind)) out.push_back(e.id);
    return out;
  }

  /// Admittance across an element, as P/Q in w.
  std::shared_ptr<const RationalFunction> admittance(std::size_t element_id) const {
    std::lock_guard lock(mutex_);
    auto it = admittance_cache_.find(element_id);
    if (it != admittance_cache_.end()) return it->second;
    auto r = std::make_shared<const RationalFunction>(symbolic::to_rational(admittance_across(rc_, element_id)));
    admittance_cache_.emplace(element_id, r);
    return r;
  }

  /// Y'(zeta) across an element.
  complex admittance_derivative(std::size_t element_id, complex zeta, const Bindings& b) const {
    return symbolic::rational_derivative_at(*admittance(element_id), zeta, b);
  }

  ModeSet find_modes(const Bindings& b, const SolverConfig& cfg = {}) const {
    cfg.validate();
    validate_bindings(rc_.free_parameters, b);
    const std::vector<complex> coeffs = bind_polynomial(poly_, b);
    if (coeffs.empty()) throw AnalysisError("zero_determinant", "determinant vanishes after binding");

    ModeSet out;
    const symbolic::ScaledPolynomial q = symbolic::scale_polynomial(coeffs);
    for (int k = 0; k < q.zero_roots; ++k)
      out.diagnostics.push_back({complex{}, RootFate::ZeroFrequency, false, "root at zero frequency"});

    std::vector<complex> candidates;
    for (const complex& x : symbolic::companion_roots(q)) {
      const auto refined =
          symbolic::halley_refine(q.coefficients, x, cfg.root_relative_tolerance, cfg.root_max_iterations);
      const complex z = refined.root * q.scale;
      if (refined.derivative_vanished)
        out.diagnostics.push_back({z, RootFate::Retained, true, "Halley derivative vanished; root left unrefined"});
      candidates.push_back(z);
    }

    const double tol = cfg.root_relative_tolerance;
    std::vector<complex> kept;
    for (const complex& z : candidates) {
      const bool dup = std::any_of(kept.begin(), kept.end(), [&](const complex& k) {
        return std::abs(k - z) <= tol * std::max(std::abs(k), std::abs(z));
      });
      if (dup) {
        out.diagnostics.push_back({z, RootFate::Duplicate, false, "duplicate root"});
        continue;
      }
      kept.push_back(z);
    }

    std::vector<complex> survivors;
    for (const complex& z : kept) {
      if (std::abs(z.real()) <= tol * std::abs(z)) {
        out.diagnostics.push_back({z, RootFate::ZeroFrequency, false, "zero-frequency (overdamped) root"});
        continue;
      }
      if (z.real() < 0.0) {
        out.diagnostics.push_back({z, RootFate::NegativePart, false, "negative-frequency root"});
        continue;
      }
      if (z.imag() < 0.0) {
        out.diagnostics.push_back({z, RootFate::NegativePart, true,
                                   "root with negative imaginary part discarded: " + describe(z)});
        continue;
      }
      if (!passes_sign_test(z, b, out.diagnostics)) {
        out.diagnostics.push_back(
            {z, RootFate::SignTest, true, "root discarded, Im Y'(w) <= 0 at every inductive element: " + describe(z)});
        continue;
      }
      if (z.imag() != 0.0 && z.real() / (2.0 * z.imag()) < cfg.q_min) {
        out.diagnostics.push_back({z, RootFate::SubQMin, true,
                                   "root discarded, quality factor below q_min: " + describe(z)});
        continue;
      }
      survivors.push_back(z);
    }
    if (survivors.empty()) throw AnalysisError("no_modes", "no normal mode survived root filtering");
    std::sort(survivors.begin(), survivors.end(), [](complex a, complex c) { return a.real() < c.real(); });
    for (const complex& z : survivors) out.diagnostics.push_back({z, RootFate::Retained, false, "mode"});
    out.zetas = std::move(survivors);
    return out;
  }

 private:
  static std::string describe(complex z) {
    return "f = " + detail::format_double(z.real() / (2.0 * std::numbers::pi)) +
           " Hz, kappa = " + detail::format_double(z.imag() / std::numbers::pi) + " Hz";
  }

  bool passes_sign_test(complex z, const Bindings& b, std::vector<RootDiagnostic>& diag) const {
    for (std::size_t id : inductive_elements()) {
      try {
        if (admittance_derivative(id, z, b).imag() > 0.0) return true;
      } catch (const AnalysisError& err) {
        diag.push_back({z, RootFate::Retained, false,
                        "element " + std::to_string(id) + " skipped in Y' sign test: " + err.what()});
      }
    }
    return false;
  }

  ReducedCircuit rc_;
  AdmittanceMatrix matrix_;
  OmegaPolynomial poly_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::shared_ptr<const RationalFunction>> admittance_cache_;
};

inline ModeSet find_modes(const ReducedCircuit& rc, const Bindings& b, const SolverConfig& cfg = {}) {
  return SpectrumSolver(rc).find_modes(b, cfg);
}

}  // namespace circuitq
