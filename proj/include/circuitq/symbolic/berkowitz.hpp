#pragma once

#include <cstddef>
#include <vector>

#include "circuitq/error.hpp"
#include "circuitq/symbolic/polynomial.hpp"

namespace circuitq::symbolic {

/// Dense row-major square matrix over an arbitrary ring.
template <class T>
using SquareMatrix = std::vector<std::vector<T>>;

/// Coefficients of det(x I - A), highest power first (result[0] == 1),
/// computed with Berkowitz's division-free algorithm.
///
/// Works over any commutative ring (complex numbers, expressions,
/// polynomials in omega). Cost is O(n^4) ring multiplications.
template <class T>
std::vector<T> berkowitz_characteristic(const SquareMatrix<T>& a) {
  const std::size_t n = a.size();
  for (const auto& row : a)
    if (row.size() != n) throw AnalysisError("non_square", "matrix is not square");
  if (n == 0) throw AnalysisError("empty_matrix", "matrix is empty");

  const T one(1.0);
  // Characteristic polynomial of the leading 1x1 block.
  std::vector<T> c{one, -a[0][0]};

  for (std::size_t r = 1; r < n; ++r) {
    // Leading block M is r x r; R = row r (cols < r), S = column r (rows < r).
    // Toeplitz column: 1, -a_rr, -R S, -R M S, ..., -R M^{r-1} S.
    std::vector<T> toeplitz;
    toeplitz.reserve(r + 2);
    toeplitz.push_back(one);
    toeplitz.push_back(-a[r][r]);

    std::vector<T> v(r);  // M^k S
    for (std::size_t i = 0; i < r; ++i) v[i] = a[i][r];
    for (std::size_t k = 0; k < r; ++k) {
      T dot{};
      for (std::size_t j = 0; j < r; ++j) {
        if (is_zero(a[r][j]) || is_zero(v[j])) continue;
        dot = dot + a[r][j] * v[j];
      }
      toeplitz.push_back(-dot);
      if (k + 1 == r) break;
      std::vector<T> next(r);
      for (std::size_t i = 0; i < r; ++i) {
        T s{};
        for (std::size_t j = 0; j < r; ++j) {
          if (is_zero(a[i][j]) || is_zero(v[j])) continue;
          s = s + a[i][j] * v[j];
        }
        next[i] = std::move(s);
      }
      v = std::move(next);
    }

    // New coefficients: lower-triangular Toeplitz (r+2) x (r+1) times c.
    std::vector<T> next(r + 2);
    for (std::size_t i = 0; i < r + 2; ++i) {
      T s{};
      for (std::size_t j = 0; j <= i && j < c.size(); ++j) {
        if (is_zero(toeplitz[i - j]) || is_zero(c[j])) continue;
        s = s + toeplitz[i - j] * c[j];
      }
      next[i] = std::move(s);
    }
    c = std::move(next);
  }
  return c;
}

/// Division-free determinant.
template <class T>
T berkowitz_determinant(const SquareMatrix<T>& a) {
  auto c = berkowitz_characteristic(a);
  // c[n] = det(-A) = (-1)^n det(A)
  return (a.size() % 2 == 0) ? c.back() : -c.back();
}

}  // namespace circuitq::symbolic
