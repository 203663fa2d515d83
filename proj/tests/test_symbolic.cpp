#include <gtest/gtest.h>

#include <random>

#include "circuitq/symbolic/berkowitz.hpp"
#include "circuitq/symbolic/expression.hpp"
#include "circuitq/symbolic/parameter_polynomial.hpp"
#include "circuitq/symbolic/polynomial.hpp"
#include "circuitq/symbolic/rational.hpp"
#include "circuitq/symbolic/roots.hpp"
#include "oracles.hpp"

using namespace circuitq;
using namespace circuitq::symbolic;
using cd = std::complex<double>;

namespace {

const std::string& w_name() { return frequency_symbol_name(); }

/// Residual |p(x)| in binary128, independent of the library's Horner.
double quad_residual(const std::vector<cd>& c, cd x) {
  __float128 re = 0, im = 0;
  const __float128 xr = x.real(), xi = x.imag();
  for (std::size_t k = c.size(); k-- > 0;) {
    const __float128 nr = re * xr - im * xi + static_cast<__float128>(c[k].real());
    const __float128 ni = re * xi + im * xr + static_cast<__float128>(c[k].imag());
    re = nr;
    im = ni;
  }
  return std::sqrt(static_cast<double>(re * re + im * im));
}

std::vector<cd> from_roots(const std::vector<cd>& roots, cd lead = 1.0) {
  std::vector<cd> c{lead};
  for (const cd& r : roots) {
    std::vector<cd> n(c.size() + 1);
    for (std::size_t k = 0; k < c.size(); ++k) {
      n[k + 1] += c[k];
      n[k] -= r * c[k];
    }
    c = n;
  }
  return c;
}

cd random_complex(std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  return {scale * g(rng), scale * g(rng)};
}

/// Random expression over {ω, a, b}; returns the expression and its value
/// computed directly, without any simplification.
std::pair<Expression, cd> random_expression(std::mt19937& rng, int depth, const std::map<std::string, cd>& at) {
  std::uniform_int_distribution<int> op(0, depth <= 0 ? 1 : 7);
  switch (op(rng)) {
    case 0: {
      const std::string names[] = {w_name(), "a", "b"};
      const std::string& n = names[std::uniform_int_distribution<int>(0, 2)(rng)];
      return {Expression::symbol(n), at.at(n)};
    }
    case 1: {
      const int k = std::uniform_int_distribution<int>(-1, 3)(rng);
      return {Expression(static_cast<double>(k)), cd(k, 0)};
    }
    case 2:
    case 3: {
      auto [x, vx] = random_expression(rng, depth - 1, at);
      auto [y, vy] = random_expression(rng, depth - 1, at);
      return {x + y, vx + vy};
    }
    case 4: {
      auto [x, vx] = random_expression(rng, depth - 1, at);
      auto [y, vy] = random_expression(rng, depth - 1, at);
      return {x - y, vx - vy};
    }
    case 5: {
      auto [x, vx] = random_expression(rng, depth - 1, at);
      auto [y, vy] = random_expression(rng, depth - 1, at);
      return {x * y, vx * vy};
    }
    case 6: {
      auto [x, vx] = random_expression(rng, depth - 1, at);
      auto [y, vy] = random_expression(rng, depth - 1, at);
      if (std::abs(vy) < 1e-3) return {x, vx};
      return {x / y, vx / vy};
    }
    default: {
      auto [x, vx] = random_expression(rng, depth - 1, at);
      const int e = std::uniform_int_distribution<int>(-2, 3)(rng);
      if (e < 0 && std::abs(vx) < 1e-3) return {x, vx};
      return {x.pow(e), std::pow(vx, e)};
    }
  }
}

}  // namespace

TEST(Expression, ConstantFoldingAndIdentities) {
  const Expression x = Expression::symbol("x");
  EXPECT_TRUE((Expression(2.0) + Expression(3.0)).is_constant());
  EXPECT_EQ((Expression(2.0) * Expression(3.0)).constant_value(), cd(6.0));
  EXPECT_EQ((x * Expression(1.0)).id(), x.id());
  EXPECT_EQ((x + Expression(0.0)).id(), x.id());
  EXPECT_TRUE((x * Expression(0.0)).is_zero());
  EXPECT_EQ(x.pow(0).constant_value(), cd(1.0));
  EXPECT_EQ((x + x * Expression::symbol("y")).symbols(), (std::set<std::string>{"x", "y"}));
}

// Property: simplification and compilation preserve point values.
TEST(ExpressionProperty, EvaluationCommutesWithSimplification) {
  std::mt19937 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::map<std::string, cd> at{{w_name(), random_complex(rng)}, {"a", random_complex(rng)}, {"b", random_complex(rng)}};
    auto [e, expected] = random_expression(rng, 5, at);
    if (!std::isfinite(std::abs(expected)) || std::abs(expected) > 1e8) continue;
    const cd direct = e.evaluate(at);
    const cd compiled = CompiledExpressions({e}).evaluate(at)[0];
    const double scale = std::max(1.0, std::abs(expected));
    EXPECT_LE(std::abs(direct - expected), 1e-9 * scale) << e.to_string();
    EXPECT_LE(std::abs(compiled - expected), 1e-9 * scale) << e.to_string();
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(Berkowitz, TwoByTwo) {
  const Expression a = Expression::symbol("a"), b = Expression::symbol("b"), c = Expression::symbol("c"),
                   d = Expression::symbol("d");
  const Expression det = berkowitz_determinant<Expression>({{a, b}, {c, d}});
  const std::map<std::string, cd> at{{"a", 1.5}, {"b", cd(0, 2)}, {"c", -3.0}, {"d", cd(4, 1)}};
  EXPECT_LT(std::abs(det.evaluate(at) - (cd(1.5) * cd(4, 1) - cd(0, 2) * cd(-3.0))), 1e-14);
}

// Property: Berkowitz determinant equals the LU determinant.
TEST(BerkowitzProperty, MatchesLu) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 8;
    SquareMatrix<cd> m(static_cast<std::size_t>(n), std::vector<cd>(static_cast<std::size_t>(n)));
    Eigen::MatrixXcd e(n, n);
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) e(r, s) = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] = random_complex(rng);
    const cd lu = oracle::lu_determinant(e);
    EXPECT_LE(oracle::rel_err(berkowitz_determinant(m), lu), n <= 4 ? 1e-10 : 1e-9) << "n=" << n;
  }
}

TEST(BerkowitzProperty, SymbolicEntriesAtRandomBindings) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    SquareMatrix<Expression> m(static_cast<std::size_t>(n), std::vector<Expression>(static_cast<std::size_t>(n)));
    std::map<std::string, cd> at;
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        const std::string name = "m" + std::to_string(r) + "_" + std::to_string(s);
        m[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] = Expression::symbol(name);
      }
    const Expression det = berkowitz_determinant(m);
    for (int b = 0; b < 3; ++b) {
      Eigen::MatrixXcd e(n, n);
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) e(r, s) = at["m" + std::to_string(r) + "_" + std::to_string(s)] = random_complex(rng);
      EXPECT_LE(oracle::rel_err(det.evaluate(at), oracle::lu_determinant(e)), 1e-9);
    }
  }
}

TEST(ParameterPolynomial, QuadPrecisionKeepsSmallDifferences) {
  // 1e20 + 1 - 1e20 loses the 1 in double arithmetic.
  const ParameterPolynomial p = ParameterPolynomial(1e20) + ParameterPolynomial(1.0) - ParameterPolynomial(1e20);
  const BoundValue v = p.evaluate({});
  EXPECT_EQ(v.value, cd(1.0));
  const ParameterPolynomial x = ParameterPolynomial::symbol("x");
  const ParameterPolynomial q = (x * 1e20 + ParameterPolynomial(1.0)) * x - x * x * 1e20;
  EXPECT_EQ(q.evaluate({{"x", 3.0}}).value, cd(3.0));
}

TEST(ParameterPolynomial, InverseMonomialAndBinding) {
  const ParameterPolynomial l = ParameterPolynomial::symbol("L");
  const ParameterPolynomial inv = (l * cd(0, 2)).inverse_monomial();
  EXPECT_LT(std::abs(inv.evaluate({{"L", 4.0}}).value - 1.0 / cd(0, 8)), 1e-15);
  EXPECT_THROW(inv.evaluate({}), BindingError);
  EXPECT_THROW((l + ParameterPolynomial(1.0)).inverse_monomial(), AnalysisError);
}

TEST(PolynomialRoots, Examples) {
  auto roots = polynomial_roots(std::vector<cd>{-1.0, 0.0, 1.0});
  std::sort(roots.begin(), roots.end(), [](cd a, cd b) { return a.real() < b.real(); });
  EXPECT_NEAR(roots[0].real(), -1.0, 1e-14);
  EXPECT_NEAR(roots[1].real(), 1.0, 1e-14);

  // L C w^2 - i R C w - 1
  const double L = 10e-9, C = 100e-15, R = 50.0;
  const auto rlc = polynomial_roots(std::vector<cd>{-1.0, cd(0, -R * C), L * C});
  const cd disc = std::sqrt(cd(4 * L * C - R * R * C * C));
  for (const cd expected : {(cd(0, R * C) + disc) / (2 * L * C), (cd(0, R * C) - disc) / (2 * L * C)}) {
    const double best = std::min(oracle::rel_err(rlc[0], expected), oracle::rel_err(rlc[1], expected));
    EXPECT_LT(best, 1e-12);
  }
  for (const cd& r : rlc) {
    EXPECT_NEAR(std::abs(r.real()), std::sqrt(1 / (L * C) - R * R / (4 * L * L)), 1e-12 * 3.2e10);
    EXPECT_NEAR(std::abs(r.real()), 3.1623e10, 0.01 * 3.1623e10);
    EXPECT_NEAR(r.imag(), R / (2 * L), 1e-6 * R / (2 * L));
  }

  const cd z{3.0, 0.1};
  const auto pair = polynomial_roots(from_roots({z, std::conj(z)}));
  for (const cd expected : {z, std::conj(z)})
    EXPECT_LT(std::min(std::abs(pair[0] - expected), std::abs(pair[1] - expected)), 1e-10);

  EXPECT_THROW(polynomial_roots(std::vector<cd>{0.0, 0.0}), AnalysisError);
  EXPECT_THROW(polynomial_roots(std::vector<cd>{2.0}), AnalysisError);
}

// Property: Vieta's sum and product of roots.
TEST(PolynomialRootsProperty, Vieta) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 10;
    std::vector<cd> c(static_cast<std::size_t>(d + 1));
    for (auto& x : c) x = random_complex(rng);
    const auto roots = polynomial_roots(c);
    ASSERT_EQ(roots.size(), static_cast<std::size_t>(d));
    cd sum{}, prod{1.0};
    double sum_scale = 0.0;
    for (const cd& r : roots) {
      sum += r;
      prod *= r;
      sum_scale += std::abs(r);
    }
    const cd want_sum = -c[static_cast<std::size_t>(d - 1)] / c.back();
    const cd want_prod = (d % 2 == 0 ? 1.0 : -1.0) * c[0] / c.back();
    EXPECT_LE(std::abs(sum - want_sum), 1e-8 * std::max(std::abs(want_sum), sum_scale)) << "d=" << d;
    EXPECT_LE(oracle::rel_err(prod, want_prod), 1e-8) << "d=" << d;
  }
}

TEST(Halley, ConvergesQuickly) {
  const auto r = halley_refine(std::vector<cd>{-4.0, 0.0, 1.0}, cd(1.9), 1e-12, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 5);
  EXPECT_NEAR(r.root.real(), 2.0, 2e-12);
  EXPECT_EQ(r.root.imag(), 0.0);
}

TEST(Halley, TinyImaginaryPartIsZeroed) {
  const cd z{1.0, 1e-13};
  const auto r = halley_refine(from_roots({z, -std::conj(z)}), z, 1e-11, 100);
  EXPECT_EQ(r.root.imag(), 0.0);
  EXPECT_NEAR(r.root.real(), 1.0, 1e-12);
}

TEST(Halley, ImprovesPlainCompanionOnPlantedHighQPairs) {
  // Baseline: companion matrix of the max-coefficient-scaled polynomial,
  // no frequency scaling or balancing.
  for (double q : {1e3, 1e5, 1e6}) {
    std::vector<cd> roots;
    for (double f : {4.99e9, 5.28e9, 7.1e9}) {
      const double w = 2 * oracle::kPi * f;
      roots.push_back({w, w / (2 * q)});
      roots.push_back({-w, w / (2 * q)});
    }
    const std::vector<cd> c = from_roots(roots, 1e-60);
    double mx = 0.0;
    for (const cd& x : c) mx = std::max(mx, std::abs(x));
    const int d = static_cast<int>(c.size()) - 1;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (int j = 0; j < d; ++j) m(0, j) = -(c[static_cast<std::size_t>(d - 1 - j)] / mx) / (c.back() / mx);
    for (int i = 1; i < d; ++i) m(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    for (int i = 0; i < d; ++i) {
      const cd z0 = es.eigenvalues()(i);
      const auto refined = halley_refine(c, z0, 1e-15, 100);
      EXPECT_GE(quad_residual(c, z0), 1e3 * quad_residual(c, refined.root)) << "Q=" << q;
    }
  }
}

// Property: Halley never increases |p|.
TEST(HalleyProperty, NeverIncreasesResidual) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 8;
    std::vector<cd> roots;
    for (int k = 0; k < d; ++k) roots.push_back(random_complex(rng));
    const std::vector<cd> c = from_roots(roots, random_complex(rng));
    const cd guess = roots[0] + random_complex(rng, 0.05);
    const auto r = halley_refine(c, guess, 1e-12, 100);
    EXPECT_LE(quad_residual(c, r.root), quad_residual(c, guess) * (1 + 1e-12));
  }
}

TEST(Rational, DerivativeOfLcAdmittanceAtResonance) {
  // Y = i C w + 1/(i L w)
  const Expression w = Expression::frequency();
  const Expression y = Expression(cd(0, 1)) * Expression::symbol("C") * w +
                       Expression(1.0) / (Expression(cd(0, 1)) * Expression::symbol("L") * w);
  const double L = 10e-9, C = 100e-15;
  const RationalFunction r = to_rational(y);
  const cd zeta{1.0 / std::sqrt(L * C), 0.0};
  const cd d = rational_derivative_at(r, zeta, {{"L", L}, {"C", C}});
  EXPECT_NEAR(d.real(), 0.0, 1e-9 * 2 * C);
  EXPECT_NEAR(d.imag(), 2 * C, 1e-9 * 2 * C);
  EXPECT_NEAR(std::abs(d.imag()) / 2, C, 1e-9 * C);
}

TEST(Rational, SimpleQuotient) {
  const Expression w = Expression::frequency();
  const RationalFunction r = to_rational((w - Expression(2.0)) / (w + Expression(1.0)));
  EXPECT_LT(std::abs(rational_derivative_at(r, cd(2.0), {}) - cd(1.0 / 3.0)), 1e-14);
  EXPECT_THROW(rational_derivative_at(r, cd(2.5), {}), AnalysisError);
}

TEST(Rational, PoleZeroCollisionIsReported) {
  const Expression w = Expression::frequency();
  // (w-1)(w+3) / ((w-1)(w+2)) with the (w-1) factors built separately so
  // they are not cancelled by identity.
  const Expression num = (w - Expression(1.0)) * (w + Expression(3.0));
  const Expression den = (w * Expression(2.0) - Expression(2.0)) * (w + Expression(2.0));
  const RationalFunction r = to_rational(num / den);
  try {
    rational_derivative_at(r, cd(1.0), {});
    FAIL() << "expected pole_zero_collision";
  } catch (const AnalysisError& e) {
    EXPECT_EQ(e.code(), "pole_zero_collision");
  }
}

// Property: to_rational preserves point values.
TEST(RationalProperty, PreservesEvaluation) {
  std::mt19937 rng(41);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::map<std::string, cd> at{{w_name(), random_complex(rng)}, {"a", cd(std::abs(random_complex(rng)) + 0.1)},
                                       {"b", cd(std::abs(random_complex(rng)) + 0.1)}};
    auto [e, expected] = random_expression(rng, 4, at);
    if (!std::isfinite(std::abs(expected)) || std::abs(expected) > 1e6) continue;
    const RationalFunction r = to_rational(e);
    const cd got = r.evaluate(at.at(w_name()), {{"a", at.at("a").real()}, {"b", at.at("b").real()}});
    EXPECT_LE(std::abs(got - expected), 1e-8 * std::max(1.0, std::abs(expected))) << e.to_string();
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

// Property: P'/Q at a planted numerator root matches a central difference.
TEST(RationalProperty, DerivativeMatchesFiniteDifference) {
  std::mt19937 rng(43);
  const Expression w = Expression::frequency();
  for (int trial = 0; trial < 100; ++trial) {
    const cd z0 = random_complex(rng) + cd(3.0, 0.0);
    const cd z1 = random_complex(rng), p0 = random_complex(rng) - cd(3.0, 0.0), p1 = random_complex(rng) * 0.5;
    const Expression e = (w - Expression(z0)) * (w - Expression(z1)) / ((w - Expression(p0)) * (w - Expression(p1)));
    const RationalFunction r = to_rational(e);
    const cd d = rational_derivative_at(r, z0, {});
    const double h = 1e-5;
    const cd fd = (r.evaluate(z0 + h, {}) - r.evaluate(z0 - h, {})) / (2 * h);
    EXPECT_LE(oracle::rel_err(d, fd), 1e-6);
  }
}
