#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "circuitq/error.hpp"
#include "circuitq/symbolic/polynomial.hpp"

namespace circuitq::symbolic {

/// p(omega) rewritten as q(x) with omega = scale * x and the zero roots
/// factored out; q has unit max-magnitude coefficient.
struct ScaledPolynomial {
  std::vector<complex> coefficients;  // lowest power first
  double scale = 1.0;
  int zero_roots = 0;
};

/// Frequency and magnitude scaling. Circuit polynomials have coefficients
/// spanning hundreds of decades (omega ~ 1e10, C ~ 1e-13); after scaling the
/// lowest and highest nonzero coefficients of q have equal magnitude.
inline ScaledPolynomial scale_polynomial(const std::vector<complex>& coeffs) {
  std::size_t lo = 0;
  while (lo < coeffs.size() && coeffs[lo] == complex{}) ++lo;
  if (lo == coeffs.size()) throw AnalysisError("zero_polynomial", "polynomial is identically zero");
  std::size_t hi = coeffs.size() - 1;
  while (coeffs[hi] == complex{}) --hi;

  ScaledPolynomial out;
  out.zero_roots = static_cast<int>(lo);
  const std::size_t degree = hi - lo;
  if (degree == 0) {
    out.coefficients = {complex{1.0, 0.0}};
    return out;
  }
  const double log_scale = (std::log(std::abs(coeffs[lo])) - std::log(std::abs(coeffs[hi]))) /
                           static_cast<double>(degree);
  out.scale = std::exp(log_scale);

  std::vector<double> log_mag(degree + 1, -std::numeric_limits<double>::infinity());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= degree; ++k) {
    const complex c = coeffs[lo + k];
    if (c == complex{}) continue;
    log_mag[k] = std::log(std::abs(c)) + static_cast<double>(k) * log_scale;
    max_log = std::max(max_log, log_mag[k]);
  }
  out.coefficients.resize(degree + 1);
  for (std::size_t k = 0; k <= degree; ++k) {
    const complex c = coeffs[lo + k];
    if (c == complex{}) continue;
    out.coefficients[k] = (c / std::abs(c)) * std::exp(log_mag[k] - max_log);
  }
  return out;
}

namespace detail {

/// Parlett-Reinsch diagonal similarity balancing, in place.
inline void balance(Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(m(j, i));
        r += std::abs(m(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
}

}  // namespace detail

/// Eigenvalues of the (balanced) companion matrix of a scaled polynomial,
/// in the scaled variable x. Zero roots are not included.
inline std::vector<complex> companion_roots(const ScaledPolynomial& q) {
  const auto& c = q.coefficients;
  const auto d = static_cast<Eigen::Index>(c.size()) - 1;
  if (d <= 0) return {};
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  const complex lead = c.back();
  for (Eigen::Index j = 0; j < d; ++j) m(0, j) = -c[static_cast<std::size_t>(d - 1 - j)] / lead;
  for (Eigen::Index i = 1; i < d; ++i) m(i, i - 1) = 1.0;
  detail::balance(m);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
  if (solver.info() != Eigen::Success) throw AnalysisError("eigensolver_failed", "companion eigensolve failed");
  std::vector<complex> out(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  return out;
}

/// All complex roots (with multiplicity) of a bound polynomial given lowest
/// power first, from the eigenvalues of its companion matrix.
inline std::vector<complex> polynomial_roots(const std::vector<complex>& coeffs) {
  const ScaledPolynomial q = scale_polynomial(coeffs);
  if (q.coefficients.size() <= 1 && q.zero_roots == 0)
    throw AnalysisError("constant_polynomial", "polynomial has degree 0");
  std::vector<complex> roots(static_cast<std::size_t>(q.zero_roots), complex{});
  for (const complex& x : companion_roots(q)) roots.push_back(x * q.scale);
  return roots;
}

inline std::vector<complex> polynomial_roots(const Polynomial<complex>& p) {
  return polynomial_roots(p.coefficients());
}

struct RefinedRoot {
  complex root{};
  int iterations = 0;
  bool converged = false;
  /// Halley's denominator vanished; `root` is the unrefined guess.
  bool derivative_vanished = false;
};

/// Halley iteration from `guess`. Stops when the relative step drops below
/// `relative_tolerance`, after `max_iterations`, or when a step would
/// increase |p|. An imaginary part below `relative_tolerance * |Re|` is set
/// to exactly zero.
inline RefinedRoot halley_refine(const std::vector<complex>& coeffs, complex guess,
                                 double relative_tolerance, int max_iterations) {
  RefinedRoot out;
  complex x = guess;
  double residual = std::abs(evaluate_with_derivatives(coeffs, x).p);
  for (int it = 0; it < max_iterations; ++it) {
    const PolynomialValue v = evaluate_with_derivatives(coeffs, x);
    if (v.p == complex{}) {
      out.converged = true;
      break;
    }
    const complex denom = 2.0 * v.dp * v.dp - v.p * v.d2p;
    if (denom == complex{} || !std::isfinite(std::abs(denom))) {
      out.root = guess;
      out.derivative_vanished = true;
      out.iterations = it;
      return out;
    }
    const complex step = 2.0 * v.p * v.dp / denom;
    const complex next = x - step;
    const double next_residual = std::abs(evaluate_with_derivatives(coeffs, next).p);
    out.iterations = it + 1;
    if (!(next_residual <= residual)) {
      out.converged = std::abs(step) <= relative_tolerance * std::abs(x) * 1e3;
      break;
    }
    x = next;
    residual = next_residual;
    if (std::abs(step) <= relative_tolerance * std::abs(x)) {
      out.converged = true;
      break;
    }
  }
  if (std::abs(x.imag()) < relative_tolerance * std::abs(x.real())) x = complex{x.real(), 0.0};
  out.root = x;
  return out;
}

inline RefinedRoot halley_refine(const Polynomial<complex>& p, complex guess, double relative_tolerance,
                                 int max_iterations) {
  return halley_refine(p.coefficients(), guess, relative_tolerance, max_iterations);
}

}  // namespace circuitq::symbolic
