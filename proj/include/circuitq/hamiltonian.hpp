#pragma once

// Truncated Fock-basis Hamiltonian of the normal modes with Taylor-expanded
// junction potentials, plus the charge-basis Cooper-pair-box model.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <vector>

#include "circuitq/constants.hpp"
#include "circuitq/error.hpp"
#include "circuitq/quantize.hpp"

namespace circuitq {

/// Tensor product of truncated Fock spaces; dims[i] levels for mode i.
struct FockSpace {
  std::vector<int> modes;
  std::vector<int> dims;

  std::size_t dimension() const {
    std::size_t d = 1;
    for (int n : dims) d *= static_cast<std::size_t>(n);
    return d;
  }
};

/// Dense Hermitian matrix in Hz (H/h).
struct HermitianOperator {
  FockSpace space;
  Eigen::MatrixXcd matrix;
};

struct HamiltonianOptions {
  /// Largest allowed total Hilbert-space dimension.
  std::size_t dimension_cap = std::size_t{1} << 14;
};

namespace detail {

/// Annihilation operator of factor `k` embedded in the product space.
/// Basis index is row-major over modes (last mode fastest).
inline Eigen::MatrixXcd embedded_annihilation(const std::vector<int>& dims, std::size_t k) {
  const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                            [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
  std::size_t stride = 1;
  for (std::size_t i = k + 1; i < dims.size(); ++i) stride *= static_cast<std::size_t>(dims[i]);
  const auto dk = static_cast<std::size_t>(dims[k]);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  for (std::size_t s = 0; s < total; ++s) {
    const std::size_t n = (s / stride) % dk;
    if (n == 0) continue;
    a(static_cast<Eigen::Index>(s - stride), static_cast<Eigen::Index>(s)) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace detail

/// Hamiltonian from mode frequencies (Hz), junction energies E_j/h (Hz) and
/// complex phase zpf z[j][m] of mode m across junction j:
/// H = sum_m f_m n_m + sum_j sum_{n>=2, 2n<=taylor} E_j (-1)^{n+1}/(2n)! phi_j^{2n},
/// phi_j = sum_m (conj(z) a_m + z a_m^dagger).
inline HermitianOperator build_hamiltonian(const std::vector<double>& frequencies, const std::vector<int>& dims,
                                           const std::vector<double>& junction_energies,
                                           const std::vector<std::vector<complex>>& phases, int taylor,
                                           const HamiltonianOptions& opt = {}) {
  if (taylor < 4 || taylor % 2 != 0) throw BindingError("invalid_taylor", "taylor order must be even and >= 4");
  if (dims.size() != frequencies.size())
    throw BindingError("invalid_excitations", "one excitation count per mode is required");
  for (int d : dims)
    if (d < 2) throw BindingError("invalid_excitations", "each mode needs at least 2 Fock levels");
  if (junction_energies.size() != phases.size())
    throw BindingError("invalid_phases", "one phase row per junction is required");
  HermitianOperator h;
  h.space.dims = dims;
  for (std::size_t m = 0; m < dims.size(); ++m) h.space.modes.push_back(static_cast<int>(m));
  // Overflow-safe product check.
  std::size_t total = 1;
  for (int d : dims) {
    if (total > opt.dimension_cap / static_cast<std::size_t>(d))
      throw BindingError("dimension_cap", "Hilbert space exceeds the dimension cap of " +
                                              std::to_string(opt.dimension_cap));
    total *= static_cast<std::size_t>(d);
  }
  const auto n = static_cast<Eigen::Index>(total);

  std::vector<Eigen::MatrixXcd> a;
  for (std::size_t m = 0; m < dims.size(); ++m) a.push_back(detail::embedded_annihilation(dims, m));

  h.matrix = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t m = 0; m < dims.size(); ++m) h.matrix += frequencies[m] * (a[m].adjoint() * a[m]);

  for (std::size_t j = 0; j < junction_energies.size(); ++j) {
    if (phases[j].size() != dims.size()) throw BindingError("invalid_phases", "one phase per mode is required");
    Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t m = 0; m < dims.size(); ++m)
      phi += std::conj(phases[j][m]) * a[m] + phases[j][m] * a[m].adjoint();
    const Eigen::MatrixXcd phi2 = phi * phi;
    Eigen::MatrixXcd power = phi2;
    for (int k = 2; 2 * k <= taylor; ++k) {
      power = power * phi2;
      const double c = junction_energies[j] * ((k % 2 == 0) ? -1.0 : 1.0) / detail::factorial(2 * k);
      h.matrix += c * power;
    }
  }
  h.matrix = (0.5 * (h.matrix + h.matrix.adjoint())).eval();
  return h;
}

/// Hamiltonian of selected retained modes of a circuit.
inline HermitianOperator build_hamiltonian(const Analyzer& analyzer, const Bindings& b, const std::vector<int>& modes,
                                           const std::vector<int>& excitations, int taylor,
                                           const SolverConfig& cfg = {}, const HamiltonianOptions& opt = {}) {
  if (modes.empty()) throw BindingError("invalid_modes", "at least one mode is required");
  if (modes.size() != excitations.size())
    throw BindingError("invalid_excitations", "one excitation count per mode is required");
  const QuantizedModes q = analyzer.quantize(b, cfg);
  std::vector<double> f;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const int m = modes[i];
    if (m < 0 || static_cast<std::size_t>(m) >= q.modes.size())
      throw BindingError("invalid_modes", "mode " + std::to_string(m) + " is not a retained mode");
    for (std::size_t k = 0; k < i; ++k)
      if (modes[k] == m) throw BindingError("invalid_modes", "mode listed twice");
    f.push_back(q.modes[static_cast<std::size_t>(m)].zeta.real() / (2.0 * std::numbers::pi));
  }
  std::vector<double> ej;
  std::vector<std::vector<complex>> phases;
  for (const auto& e : analyzer.circuit().elements) {
    if (e.kind != ComponentKind::Junction) continue;
    ej.push_back(josephson_energy_from_inductance(element_value(e, b)));
    std::vector<complex> row;
    for (int m : modes) row.push_back(q.modes[static_cast<std::size_t>(m)].phi_zpf.at(e.id));
    phases.push_back(std::move(row));
  }
  HermitianOperator h = build_hamiltonian(f, excitations, ej, phases, taylor, opt);
  h.space.modes = modes;
  return h;
}

/// Ascending eigenvalues (Hz), without ground-state subtraction.
inline std::vector<double> eigenenergies(const HermitianOperator& h) {
  const Eigen::MatrixXcd& m = h.matrix;
  if (m.rows() != m.cols()) throw AnalysisError("not_square", "operator is not square");
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  const double asym = (m - m.adjoint()).cwiseAbs().rowwise().sum().maxCoeff();
  if (asym > 1e-9 * norm) throw AnalysisError("not_hermitian", "operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw AnalysisError("eigensolver_failed", "Hermitian eigensolve failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

inline std::vector<double> eigenenergies(const Eigen::MatrixXcd& m) { return eigenenergies(HermitianOperator{{}, m}); }

/// Cooper-pair box in the charge basis N = -(basis-1)/2 .. (basis-1)/2:
/// diagonal 4 E_C (N - N_g)^2, nearest-neighbour coupling -hopping * E_j.
/// hopping = 1/2 gives the -E_j cos(phi) potential.
inline HermitianOperator cpb_hamiltonian(double ec, double ej, double ng, int basis = 41, double hopping = 0.5) {
  if (basis < 1 || basis % 2 == 0) throw BindingError("invalid_basis", "basis size must be odd");
  const int half = (basis - 1) / 2;
  HermitianOperator h;
  h.space.dims = {basis};
  h.space.modes = {0};
  h.matrix = Eigen::MatrixXcd::Zero(basis, basis);
  for (int i = 0; i < basis; ++i) {
    const double nn = static_cast<double>(i - half) - ng;
    h.matrix(i, i) = 4.0 * ec * nn * nn;
    if (i + 1 < basis) {
      h.matrix(i, i + 1) = -hopping * ej;
      h.matrix(i + 1, i) = -hopping * ej;
    }
  }
  return h;
}

/// First two transition frequencies (E1-E0, E2-E1) of a spectrum.
struct Transitions {
  double ge = std::numeric_limits<double>::quiet_NaN();
  double ef = std::numeric_limits<double>::quiet_NaN();
};

inline Transitions transitions(const std::vector<double>& e) {
  Transitions t;
  if (e.size() >= 2) t.ge = e[1] - e[0];
  if (e.size() >= 3) t.ef = e[2] - e[1];
  return t;
}

struct ConvergenceResult {
  bool converged = false;
  int taylor = 0;
  int dim = 0;
  Transitions at;
};

/// Transitions of a single mode vs (taylor, dim), memoized. Each Fock
/// dimension is computed once for all Taylor orders up to `taylor_max`.
class SingleModeTransitions {
 public:
  SingleModeTransitions(double frequency, std::vector<double> ej, std::vector<complex> phases, int taylor_max)
      : f_(frequency), ej_(std::move(ej)), z_(std::move(phases)), taylor_max_(taylor_max) {}

  double frequency() const { return f_; }

  Transitions at(int taylor, int dim) {
    auto it = table_.find(dim);
    if (it == table_.end()) it = table_.emplace(dim, compute(dim)).first;
    return it->second.at(static_cast<std::size_t>((taylor - 4) / 2));
  }

 private:
  std::vector<Transitions> compute(int dim) const {
    const Eigen::MatrixXcd a = detail::embedded_annihilation({dim}, 0);
    Eigen::MatrixXcd h = f_ * (a.adjoint() * a);
    std::vector<Eigen::MatrixXcd> phi2, power;
    for (std::size_t j = 0; j < ej_.size(); ++j) {
      const Eigen::MatrixXcd phi = std::conj(z_[j]) * a + z_[j] * a.adjoint();
      phi2.push_back(phi * phi);
      power.push_back(phi2.back());
    }
    std::vector<Transitions> out;
    for (int k = 2; 2 * k <= taylor_max_; ++k) {
      for (std::size_t j = 0; j < ej_.size(); ++j) {
        power[j] = power[j] * phi2[j];
        h += ej_[j] * ((k % 2 == 0) ? -1.0 : 1.0) / detail::factorial(2 * k) * power[j];
      }
      out.push_back(transitions(eigenenergies(Eigen::MatrixXcd(0.5 * (h + h.adjoint())))));
    }
    return out;
  }

  double f_;
  std::vector<double> ej_;
  std::vector<complex> z_;
  int taylor_max_;
  std::map<int, std::vector<Transitions>> table_;
};

/// Smallest (taylor, dim), taylor first, such that raising taylor by 2 or dim
/// by 1 changes both transitions by less than `rel_change`. Only weakly
/// anharmonic spectra (0 < ef <= ge, ge > f/2) qualify: once the Fock space
/// spans several wells of the cosine, the low states become stable but
/// unphysical multi-well states with ge << f.
inline ConvergenceResult convergence_scan(SingleModeTransitions& model, int taylor_max, int dim_max,
                                          double rel_change = 1e-3) {
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  auto close = [&](const Transitions& x, const Transitions& y) {
    return rel(x.ge, y.ge) < rel_change && rel(x.ef, y.ef) < rel_change;
  };
  for (int t = 4; t + 2 <= taylor_max; t += 2)
    for (int d = 3; d + 1 <= dim_max; ++d) {
      const Transitions base = model.at(t, d);
      if (!(base.ef > 0.0 && base.ef <= base.ge && base.ge > 0.5 * model.frequency())) continue;
      if (close(model.at(t + 2, d), base) && close(model.at(t, d + 1), base)) return {true, t, d, base};
    }
  ConvergenceResult r;
  r.taylor = taylor_max;
  r.dim = dim_max;
  r.at = model.at(taylor_max, dim_max);
  return r;
}

inline ConvergenceResult convergence_scan(const Analyzer& analyzer, const Bindings& b, int mode, int taylor_max,
                                          int dim_max, double rel_change = 1e-3, const SolverConfig& cfg = {}) {
  if (taylor_max < 6 || dim_max < 4) throw BindingError("invalid_caps", "caps must allow at least one increment");
  const QuantizedModes q = analyzer.quantize(b, cfg);
  if (mode < 0 || static_cast<std::size_t>(mode) >= q.modes.size())
    throw BindingError("invalid_modes", "mode " + std::to_string(mode) + " is not a retained mode");
  const auto& m = q.modes[static_cast<std::size_t>(mode)];
  std::vector<double> ej;
  std::vector<complex> z;
  for (const auto& e : analyzer.circuit().elements) {
    if (e.kind != ComponentKind::Junction) continue;
    ej.push_back(josephson_energy_from_inductance(element_value(e, b)));
    z.push_back(m.phi_zpf.at(e.id));
  }
  SingleModeTransitions model(m.zeta.real() / (2.0 * std::numbers::pi), std::move(ej), std::move(z), taylor_max);
  return convergence_scan(model, taylor_max, dim_max, rel_change);
}

/// {"dims":[...],"entries":[[re,im],...]} with entries row-major.
inline void write_operator_json(std::ostream& os, const HermitianOperator& h) {
  os << "{\"dims\":[";
  for (std::size_t i = 0; i < h.space.dims.size(); ++i) os << (i ? "," : "") << h.space.dims[i];
  os << "],\"entries\":[";
  for (Eigen::Index r = 0; r < h.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < h.matrix.cols(); ++c) {
      const complex v = h.matrix(r, c);
      os << ((r || c) ? "," : "") << '[' << detail::format_double(v.real()) << ','
         << detail::format_double(v.imag()) << ']';
    }
  os << "]}";
}

}  // namespace circuitq
