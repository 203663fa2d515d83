#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

#include "circuitq/symbolic/expression.hpp"
#include "circuitq/symbolic/parameter_polynomial.hpp"

namespace circuitq::symbolic {

inline bool is_zero(const complex& c) { return c == complex{}; }
inline bool is_zero(double c) { return c == 0.0; }

namespace detail {
template <class T>
bool coefficient_is_zero(const T& c) {
  return is_zero(c);
}
}  // namespace detail

/// Univariate polynomial in omega, coefficients c0..cd (lowest power first),
/// over any commutative ring T with +, -, * and a free `is_zero(T)`.
template <class T>
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(T constant) : coeffs_{std::move(constant)} { trim(); }
  explicit Polynomial(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  /// T * omega^power
  static Polynomial monomial(T c, std::size_t power) {
    std::vector<T> v(power + 1);
    v[power] = std::move(c);
    return Polynomial(std::move(v));
  }

  const std::vector<T>& coefficients() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const T& operator[](std::size_t k) const { return coeffs_[k]; }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<T> r(std::max(a.coeffs_.size(), b.coeffs_.size()));
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k < a.coeffs_.size() && k < b.coeffs_.size()) r[k] = a.coeffs_[k] + b.coeffs_[k];
      else if (k < a.coeffs_.size()) r[k] = a.coeffs_[k];
      else r[k] = b.coeffs_[k];
    }
    return Polynomial(std::move(r));
  }

  Polynomial operator-() const {
    std::vector<T> r;
    r.reserve(coeffs_.size());
    for (const auto& c : coeffs_) r.push_back(-c);
    return Polynomial(std::move(r));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<T> r(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      if (detail::coefficient_is_zero(a.coeffs_[i])) continue;
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
        if (detail::coefficient_is_zero(b.coeffs_[j])) continue;
        r[i + j] = r[i + j] + a.coeffs_[i] * b.coeffs_[j];
      }
    }
    return Polynomial(std::move(r));
  }

  Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }
  Polynomial& operator-=(const Polynomial& o) { return *this = *this - o; }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<T> r;
    for (std::size_t k = 1; k < coeffs_.size(); ++k) r.push_back(coeffs_[k] * T(static_cast<double>(k)));
    return Polynomial(std::move(r));
  }

  /// Applies `f` to every coefficient (e.g. binding parameters).
  template <class F>
  auto map(F&& f) const -> Polynomial<decltype(f(std::declval<const T&>()))> {
    std::vector<decltype(f(std::declval<const T&>()))> r;
    r.reserve(coeffs_.size());
    for (const auto& c : coeffs_) r.push_back(f(c));
    return Polynomial<decltype(f(std::declval<const T&>()))>(std::move(r));
  }

 private:
  void trim() {
    while (!coeffs_.empty() && detail::coefficient_is_zero(coeffs_.back())) coeffs_.pop_back();
  }

  std::vector<T> coeffs_;
};

template <class T>
bool is_zero(const Polynomial<T>& p) {
  return p.is_zero();
}

/// Horner evaluation of a numeric polynomial.
inline complex evaluate(const Polynomial<complex>& p, complex x) {
  complex r{};
  const auto& c = p.coefficients();
  for (std::size_t k = c.size(); k-- > 0;) r = r * x + c[k];
  return r;
}

/// Horner evaluation returning p, p' and p'' at x.
struct PolynomialValue {
  complex p{}, dp{}, d2p{};
};

inline PolynomialValue evaluate_with_derivatives(const std::vector<complex>& c, complex x) {
  PolynomialValue v;
  for (std::size_t k = c.size(); k-- > 0;) {
    v.d2p = v.d2p * x + 2.0 * v.dp;
    v.dp = v.dp * x + v.p;
    v.p = v.p * x + c[k];
  }
  return v;
}

/// Sum of |c_k| |x|^k, the scale against which a residual is judged.
inline double magnitude_scale(const std::vector<complex>& c, complex x) {
  double r = 0.0;
  const double ax = std::abs(x);
  for (std::size_t k = c.size(); k-- > 0;) r = r * ax + std::abs(c[k]);
  return r;
}

/// Expression form sum_k c_k * omega^k.
inline Expression to_expression(const Polynomial<Expression>& p, const Expression& omega = Expression::frequency()) {
  std::vector<Expression> terms;
  for (std::size_t k = 0; k < p.coefficients().size(); ++k)
    terms.push_back(p[k] * omega.pow(static_cast<int>(k)));
  return Expression::add(std::move(terms));
}

inline Expression to_expression(const Polynomial<ParameterPolynomial>& p,
                                const Expression& omega = Expression::frequency()) {
  return to_expression(p.map([](const ParameterPolynomial& c) { return c.to_expression(); }), omega);
}

}  // namespace circuitq::symbolic
