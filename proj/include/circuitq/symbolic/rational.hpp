#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <unordered_map>
#include <vector>

#include "circuitq/error.hpp"
#include "circuitq/symbolic/expression.hpp"
#include "circuitq/symbolic/parameter_polynomial.hpp"
#include "circuitq/symbolic/polynomial.hpp"

namespace circuitq::symbolic {

/// Polynomial in omega with parameter-polynomial coefficients.
using OmegaPolynomial = Polynomial<ParameterPolynomial>;

/// A bound rational function kept as products of numeric polynomial factors.
struct BoundRational {
  complex scale{1.0, 0.0};
  std::vector<std::vector<complex>> numerator;    // each factor lowest power first
  std::vector<std::vector<complex>> denominator;

  complex evaluate(complex x) const {
    complex r = scale;
    for (const auto& f : numerator) r *= evaluate(f, x);
    for (const auto& g : denominator) r /= evaluate(g, x);
    return r;
  }

  static complex evaluate(const std::vector<complex>& c, complex x) {
    return evaluate_with_derivatives(c, x).p;
  }
};

/// P/Q in omega, with P and Q held as products of polynomial factors and a
/// scalar. Factors are shared between functions derived from one another, so
/// common factors cancel by identity (no numeric GCD).
class RationalFunction {
 public:
  using Factor = std::shared_ptr<const OmegaPolynomial>;

  RationalFunction() : scale_(1.0) {}  // the constant 1
  RationalFunction(complex c) : scale_(c) {}

  static RationalFunction from_polynomial(OmegaPolynomial p) {
    RationalFunction r;
    if (p.is_zero()) {
      r.scale_ = 0.0;
      return r;
    }
    if (p.degree() == 0 && p[0].is_constant()) {
      r.scale_ = p[0].constant_value();
      return r;
    }
    r.numerator_.push_back(std::make_shared<const OmegaPolynomial>(std::move(p)));
    return r;
  }

  bool is_zero() const { return scale_ == complex{}; }
  complex scale() const { return scale_; }
  const std::vector<Factor>& numerator_factors() const { return numerator_; }
  const std::vector<Factor>& denominator_factors() const { return denominator_; }

  /// Expanded P (including the scalar).
  OmegaPolynomial numerator() const { return expand(numerator_, scale_); }
  /// Expanded Q.
  OmegaPolynomial denominator() const { return expand(denominator_, 1.0); }

  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    RationalFunction r;
    r.scale_ = a.scale_ * b.scale_;
    if (r.is_zero()) return RationalFunction(0.0);
    r.numerator_ = a.numerator_;
    r.numerator_.insert(r.numerator_.end(), b.numerator_.begin(), b.numerator_.end());
    r.denominator_ = a.denominator_;
    r.denominator_.insert(r.denominator_.end(), b.denominator_.begin(), b.denominator_.end());
    r.cancel();
    return r;
  }

  RationalFunction inverse() const {
    if (is_zero()) throw AnalysisError("division_by_zero", "rational function is identically zero");
    RationalFunction r;
    r.scale_ = 1.0 / scale_;
    r.numerator_ = denominator_;
    r.denominator_ = numerator_;
    return r;
  }

  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
    return a * b.inverse();
  }

  RationalFunction operator-() const {
    RationalFunction r = *this;
    r.scale_ = -r.scale_;
    return r;
  }

  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    // Common numerator factors stay factored out.
    std::vector<Factor> na = a.numerator_, nb = b.numerator_, common;
    for (auto it = na.begin(); it != na.end();) {
      auto jt = std::find(nb.begin(), nb.end(), *it);
      if (jt != nb.end()) {
        common.push_back(*it);
        nb.erase(jt);
        it = na.erase(it);
      } else {
        ++it;
      }
    }
    // Least common multiple of the denominators, by factor identity.
    std::vector<Factor> lcm = a.denominator_;
    std::vector<Factor> extra_for_a;  // lcm / Da
    {
      std::vector<Factor> da = a.denominator_;
      for (const auto& f : b.denominator_) {
        auto it = std::find(da.begin(), da.end(), f);
        if (it != da.end()) {
          da.erase(it);
        } else {
          lcm.push_back(f);
          extra_for_a.push_back(f);
        }
      }
    }
    std::vector<Factor> extra_for_b = lcm;  // lcm / Db
    for (const auto& f : b.denominator_) extra_for_b.erase(std::find(extra_for_b.begin(), extra_for_b.end(), f));

    na.insert(na.end(), extra_for_a.begin(), extra_for_a.end());
    nb.insert(nb.end(), extra_for_b.begin(), extra_for_b.end());
    OmegaPolynomial sum = expand(na, a.scale_) + expand(nb, b.scale_);
    if (sum.is_zero()) return RationalFunction(0.0);

    RationalFunction r = from_polynomial(std::move(sum));
    r.numerator_.insert(r.numerator_.end(), common.begin(), common.end());
    r.denominator_ = std::move(lcm);
    r.cancel();
    return r;
  }

  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }

  /// Binds parameters; each factor is normalized to unit max-magnitude
  /// coefficient with the normalization folded into the scale.
  BoundRational bind(const ParameterValues& values) const {
    BoundRational out;
    out.scale = scale_;
    auto bind_factor = [&](const Factor& f, bool in_numerator) {
      std::vector<complex> c;
      c.reserve(f->coefficients().size());
      double norm = 0.0;
      for (const auto& pc : f->coefficients()) {
        c.push_back(pc.evaluate(values).value);
        norm = std::max(norm, std::abs(c.back()));
      }
      if (norm == 0.0) throw AnalysisError("degenerate_factor", "polynomial factor vanishes after binding");
      for (auto& x : c) x /= norm;
      if (in_numerator) out.scale *= norm;
      else out.scale /= norm;
      return c;
    };
    for (const auto& f : numerator_) out.numerator.push_back(bind_factor(f, true));
    for (const auto& g : denominator_) out.denominator.push_back(bind_factor(g, false));
    return out;
  }

  complex evaluate(complex omega, const ParameterValues& values) const { return bind(values).evaluate(omega); }

 private:
  static OmegaPolynomial expand(const std::vector<Factor>& factors, complex scale) {
    OmegaPolynomial r(ParameterPolynomial{scale});
    for (const auto& f : factors) r = r * *f;
    return r;
  }

  void cancel() {
    for (auto it = numerator_.begin(); it != numerator_.end();) {
      auto jt = std::find(denominator_.begin(), denominator_.end(), *it);
      if (jt != denominator_.end()) {
        denominator_.erase(jt);
        it = numerator_.erase(it);
      } else {
        ++it;
      }
    }
  }

  complex scale_;
  std::vector<Factor> numerator_;
  std::vector<Factor> denominator_;
};

/// Rewrites an expression built from rational operations in omega as P/Q.
/// Symbols other than omega become polynomial coefficients.
inline RationalFunction to_rational(const Expression& e) {
  std::unordered_map<const void*, RationalFunction> memo;
  const std::string& omega = frequency_symbol_name();

  auto rec = [&](auto&& self, const Expression& x) -> RationalFunction {
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    RationalFunction r;
    switch (x.kind()) {
      case Expression::Kind::Constant: r = RationalFunction(x.constant_value()); break;
      case Expression::Kind::Symbol:
        if (x.node().name == omega)
          r = RationalFunction::from_polynomial(OmegaPolynomial::monomial(ParameterPolynomial(1.0), 1));
        else
          r = RationalFunction::from_polynomial(OmegaPolynomial(ParameterPolynomial::symbol(x.node().name)));
        break;
      case Expression::Kind::Add:
        r = RationalFunction(0.0);
        for (const auto& a : x.args()) r = r + self(self, a);
        break;
      case Expression::Kind::Mul:
        for (const auto& a : x.args()) r = r * self(self, a);
        break;
      case Expression::Kind::Div: r = self(self, x.args()[0]) / self(self, x.args()[1]); break;
      case Expression::Kind::Neg: r = -self(self, x.args()[0]); break;
      case Expression::Kind::IntPow: {
        RationalFunction base = self(self, x.args()[0]);
        const int n = x.node().exponent;
        for (int k = 0; k < std::abs(n); ++k) r = r * base;
        if (n < 0) r = r.inverse();
        break;
      }
    }
    memo.emplace(x.id(), r);
    return r;
  };
  return rec(rec, e);
}

struct DerivativeTolerances {
  /// zeta is accepted as a root of P when some factor satisfies
  /// |f(zeta)| <= root * sum_k |f_k| |zeta|^k.
  double root = 1e-6;
  /// Q(zeta) is degenerate when some factor satisfies the same test at this level.
  double pole = 1e-10;
};

/// Y'(zeta) = P'(zeta)/Q(zeta) for a root zeta of the numerator P.
inline complex rational_derivative_at(const BoundRational& r, complex zeta, DerivativeTolerances tol = {}) {
  double min_rel = std::numeric_limits<double>::infinity();
  std::vector<complex> f(r.numerator.size()), df(r.numerator.size());
  for (std::size_t i = 0; i < r.numerator.size(); ++i) {
    const auto v = evaluate_with_derivatives(r.numerator[i], zeta);
    f[i] = v.p;
    df[i] = v.dp;
    min_rel = std::min(min_rel, std::abs(v.p) / magnitude_scale(r.numerator[i], zeta));
  }
  if (!(min_rel <= tol.root))
    throw AnalysisError("not_a_root", "frequency is not a root of the admittance numerator");

  complex dp{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    complex term = df[i];
    for (std::size_t k = 0; k < f.size(); ++k)
      if (k != i) term *= f[k];
    dp += term;
  }
  complex q{1.0, 0.0};
  for (const auto& g : r.denominator) {
    const complex v = BoundRational::evaluate(g, zeta);
    if (std::abs(v) <= tol.pole * magnitude_scale(g, zeta))
      throw AnalysisError("pole_zero_collision",
                          "admittance denominator vanishes at the root (pole-zero collision)");
    q *= v;
  }
  return r.scale * dp / q;
}

inline complex rational_derivative_at(const RationalFunction& r, complex zeta, const ParameterValues& values,
                                      DerivativeTolerances tol = {}) {
  return rational_derivative_at(r.bind(values), zeta, tol);
}

}  // namespace circuitq::symbolic
