#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "circuitq/error.hpp"
#include "circuitq/symbolic/expression.hpp"

namespace circuitq::symbolic {

using ParameterValues = std::map<std::string, double>;

/// Complex number in IEEE binary128. Nodal determinants of ladder-like
/// circuits lose 15+ decimal digits to cancellation between products of
/// element values, which is all of double precision by ~10 nodes.
struct QuadComplex {
  __float128 re = 0, im = 0;

  QuadComplex() = default;
  QuadComplex(complex c) : re(c.real()), im(c.imag()) {}
  QuadComplex(__float128 r, __float128 i) : re(r), im(i) {}

  complex to_complex() const { return {static_cast<double>(re), static_cast<double>(im)}; }
  double abs() const { return std::abs(to_complex()); }
  bool is_zero() const { return re == 0 && im == 0; }

  friend QuadComplex operator+(const QuadComplex& a, const QuadComplex& b) { return {a.re + b.re, a.im + b.im}; }
  friend QuadComplex operator*(const QuadComplex& a, const QuadComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  QuadComplex operator-() const { return {-re, -im}; }
  QuadComplex& operator+=(const QuadComplex& o) { return *this = *this + o; }
  QuadComplex inverse() const {
    const __float128 d = re * re + im * im;
    return {re / d, -im / d};
  }
};

/// Complex coefficient carrying a running magnitude bound: the sum of the
/// absolute values of every product that was accumulated into it. A value
/// that is tiny compared to its bound is a floating-point cancellation.
struct Coefficient {
  QuadComplex value{};
  double bound = 0.0;

  friend Coefficient operator+(Coefficient a, const Coefficient& b) {
    return {a.value + b.value, a.bound + b.bound};
  }
  friend Coefficient operator*(const Coefficient& a, const Coefficient& b) {
    return {a.value * b.value, a.bound * b.bound};
  }
  Coefficient operator-() const { return {-value, bound}; }
};

/// Result of binding: value plus the magnitude bound of its terms.
struct BoundValue {
  complex value{};
  double bound = 0.0;

  /// True when the value is indistinguishable from rounding noise.
  bool cancelled(double relative_tolerance) const {
    return std::abs(value) <= relative_tolerance * bound;
  }
};

/// Sparse Laurent polynomial in named parameters with complex coefficients.
/// Circuit admittances are linear in C, 1/L and 1/R, so every coefficient
/// of a nodal determinant is such a polynomial.
class ParameterPolynomial {
 public:
  /// Symbol name -> exponent (nonzero), sorted by name.
  using Monomial = std::vector<std::pair<std::string, int>>;
  using Term = std::pair<Monomial, Coefficient>;

  ParameterPolynomial() = default;
  ParameterPolynomial(complex c) {
    if (c != complex{}) terms_.push_back({{}, {QuadComplex(c), std::abs(c)}});
  }
  ParameterPolynomial(double c) : ParameterPolynomial(complex{c, 0.0}) {}

  static ParameterPolynomial symbol(const std::string& name, int exponent = 1) {
    ParameterPolynomial p;
    if (exponent == 0) return ParameterPolynomial(1.0);
    p.terms_.push_back({{{name, exponent}}, {QuadComplex(complex{1.0, 0.0}), 1.0}});
    return p;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_monomial() const { return terms_.size() == 1; }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.empty()); }
  complex constant_value() const { return terms_.empty() ? complex{} : terms_[0].second.value.to_complex(); }

  std::set<std::string> symbols() const {
    std::set<std::string> out;
    for (const auto& [m, c] : terms_)
      for (const auto& [name, e] : m) out.insert(name);
    return out;
  }

  friend ParameterPolynomial operator+(const ParameterPolynomial& a, const ParameterPolynomial& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    ParameterPolynomial r;
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    auto ia = a.terms_.begin();
    auto ib = b.terms_.begin();
    while (ia != a.terms_.end() || ib != b.terms_.end()) {
      if (ib == b.terms_.end() || (ia != a.terms_.end() && ia->first < ib->first)) {
        r.terms_.push_back(*ia++);
      } else if (ia == a.terms_.end() || ib->first < ia->first) {
        r.terms_.push_back(*ib++);
      } else {
        r.push_if_nonzero(ia->first, ia->second + ib->second);
        ++ia;
        ++ib;
      }
    }
    return r;
  }

  ParameterPolynomial operator-() const {
    ParameterPolynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }

  friend ParameterPolynomial operator-(const ParameterPolynomial& a, const ParameterPolynomial& b) {
    return a + (-b);
  }

  friend ParameterPolynomial operator*(const ParameterPolynomial& a, const ParameterPolynomial& b) {
    ParameterPolynomial r;
    if (a.is_zero() || b.is_zero()) return r;
    if (a.terms_.size() == 1 && b.terms_.size() == 1) {
      r.push_if_nonzero(multiply(a.terms_[0].first, b.terms_[0].first),
                        a.terms_[0].second * b.terms_[0].second);
      return r;
    }
    std::map<Monomial, Coefficient> acc;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        auto m = multiply(ma, mb);
        auto it = acc.find(m);
        if (it == acc.end()) acc.emplace(std::move(m), ca * cb);
        else it->second = it->second + ca * cb;
      }
    for (auto& [m, c] : acc) r.push_if_nonzero(m, c);
    return r;
  }

  ParameterPolynomial& operator+=(const ParameterPolynomial& o) { return *this = *this + o; }
  ParameterPolynomial& operator-=(const ParameterPolynomial& o) { return *this = *this - o; }
  ParameterPolynomial& operator*=(const ParameterPolynomial& o) { return *this = *this * o; }

  /// Exact inverse of a single-term polynomial.
  ParameterPolynomial inverse_monomial() const {
    if (!is_monomial()) throw AnalysisError("not_monomial", "only a single term can be inverted exactly");
    ParameterPolynomial r;
    Monomial m = terms_[0].first;
    for (auto& [name, e] : m) e = -e;
    const QuadComplex inv = terms_[0].second.value.inverse();
    r.terms_.push_back({std::move(m), {inv, inv.abs()}});
    return r;
  }

  /// Binds every parameter, summing in binary128. Terms whose own
  /// coefficient is cancellation noise (|value| <= tol * bound) are skipped.
  BoundValue evaluate(const ParameterValues& values, double cancellation_tolerance = 0.0) const {
    QuadComplex sum;
    double bound = 0.0;
    for (const auto& [m, c] : terms_) {
      if (c.bound > 0.0 && c.value.abs() <= cancellation_tolerance * c.bound) continue;
      __float128 mono = 1;
      for (const auto& [name, e] : m) {
        auto it = values.find(name);
        if (it == values.end()) throw BindingError("unbound_symbol", "parameter '" + name + "' is not bound");
        mono *= integer_power(it->second, e);
      }
      sum += c.value * QuadComplex(mono, 0);
      bound += c.bound * std::abs(static_cast<double>(mono));
    }
    return {sum.to_complex(), bound};
  }

  Expression to_expression() const {
    std::vector<Expression> sum;
    for (const auto& [m, c] : terms_) {
      std::vector<Expression> prod{Expression(c.value.to_complex())};
      for (const auto& [name, e] : m) prod.push_back(Expression::symbol(name).pow(e));
      sum.push_back(Expression::mul(std::move(prod)));
    }
    return Expression::add(std::move(sum));
  }

 private:
  static __float128 integer_power(double base, int e) {
    __float128 b = e < 0 ? 1 / static_cast<__float128>(base) : static_cast<__float128>(base);
    __float128 r = 1;
    for (unsigned n = static_cast<unsigned>(e < 0 ? -e : e); n; n >>= 1, b *= b)
      if (n & 1u) r *= b;
    return r;
  }

  static Monomial multiply(const Monomial& a, const Monomial& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    Monomial r;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
      if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
        r.push_back(*ia++);
      } else if (ia == a.end() || ib->first < ia->first) {
        r.push_back(*ib++);
      } else {
        if (int e = ia->second + ib->second; e != 0) r.push_back({ia->first, e});
        ++ia;
        ++ib;
      }
    }
    return r;
  }

  void push_if_nonzero(const Monomial& m, const Coefficient& c) {
    if (c.value.is_zero()) return;
    terms_.push_back({m, c});
  }

  std::vector<Term> terms_;
};

inline bool is_zero(const ParameterPolynomial& p) { return p.is_zero(); }

}  // namespace circuitq::symbolic
