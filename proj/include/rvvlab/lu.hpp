// Copyright 2026 The rvvlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HPL-style dense solve: right-looking blocked LU with partial pivoting whose
// trailing-matrix update runs through gemm_blocked, followed by triangular
// solves and the scaled residual check.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rvvlab/gemm.hpp"

namespace rvvlab {

struct LuFactors {
  /// Unit lower L below the diagonal, U on and above it.
  Matrix lu;
  /// Row i was swapped with row pivots[i] at step i (LAPACK ipiv, 0-based).
  std::vector<std::size_t> pivots;
  SimStats stats;
  std::uint64_t gemm_calls = 0;
};

inline LuFactors lu_factor(Matrix a, std::size_t block,
                           const BlockingParams& blocking = {},
                           const MicroKernelParams& params = {},
                           const GemmOptions& options = {false, {}}) {
  if (a.rows != a.cols) throw ShapeError("lu_factor needs a square matrix");
  if (block == 0) throw ConfigError("LU block size must be positive");
  const std::size_t n = a.rows;
  LuFactors f;
  f.pivots.resize(n);

  for (std::size_t j = 0; j < n; j += block) {
    const std::size_t jb = std::min(block, n - j);
    const std::size_t je = j + jb;

    // Unblocked panel factorization of columns [j, je).
    for (std::size_t c = j; c < je; ++c) {
      std::size_t p = c;
      for (std::size_t i = c + 1; i < n; ++i)
        if (std::abs(a(i, c)) > std::abs(a(p, c))) p = i;
      if (a(p, c) == 0.0) throw SingularMatrixError(c);
      f.pivots[c] = p;
      if (p != c)
        for (std::size_t col = 0; col < n; ++col) std::swap(a(c, col), a(p, col));
      const double pivot = a(c, c);
      for (std::size_t i = c + 1; i < n; ++i) a(i, c) /= pivot;
      for (std::size_t cc = c + 1; cc < je; ++cc) {
        const double u = a(c, cc);
        for (std::size_t i = c + 1; i < n; ++i) a(i, cc) -= a(i, c) * u;
      }
    }
    if (je == n) break;

    // U12 = L11^{-1} A12.
    for (std::size_t col = je; col < n; ++col)
      for (std::size_t c = j; c < je; ++c) {
        const double u = a(c, col);
        for (std::size_t i = c + 1; i < je; ++i) a(i, col) -= a(i, c) * u;
      }

    // A22 += (-L21) * U12.
    const std::size_t rest = n - je;
    Matrix neg_l21(rest, jb), u12(jb, rest), a22(rest, rest);
    for (std::size_t c = 0; c < jb; ++c)
      for (std::size_t i = 0; i < rest; ++i) neg_l21(i, c) = -a(je + i, j + c);
    for (std::size_t col = 0; col < rest; ++col) {
      for (std::size_t r = 0; r < jb; ++r) u12(r, col) = a(j + r, je + col);
      for (std::size_t i = 0; i < rest; ++i) a22(i, col) = a(je + i, je + col);
    }
    GemmResult g = gemm_blocked(neg_l21, u12, a22, blocking, params, options);
    f.stats += g.stats;
    ++f.gemm_calls;
    for (std::size_t col = 0; col < rest; ++col)
      for (std::size_t i = 0; i < rest; ++i) a(je + i, je + col) = g.c(i, col);
  }
  f.lu = std::move(a);
  return f;
}

inline std::vector<double> lu_solve(const LuFactors& f, std::span<const double> b) {
  const std::size_t n = f.lu.rows;
  if (b.size() != n) throw ShapeError("right-hand side length does not match LU");
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) std::swap(x[i], x[f.pivots[i]]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < i; ++c) x[i] -= f.lu(i, c) * x[c];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t c = i + 1; c < n; ++c) x[i] -= f.lu(i, c) * x[c];
    x[i] /= f.lu(i, i);
  }
  return x;
}

/// ||Ax - b||_inf / (eps * (||A||_inf * ||x||_inf + ||b||_inf) * n).
inline double hpl_residual(const Matrix& a, std::span<const double> x,
                           std::span<const double> b) {
  const std::size_t n = a.rows;
  if (a.cols != x.size() || b.size() != n)
    throw ShapeError("hpl_residual: dimensions do not agree");
  if (n == 0) return 0.0;
  double r_norm = 0.0, a_norm = 0.0, x_norm = 0.0, b_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = -b[i], row = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) {
      r += a(i, j) * x[j];
      row += std::abs(a(i, j));
    }
    r_norm = std::max(r_norm, std::abs(r));
    a_norm = std::max(a_norm, row);
    b_norm = std::max(b_norm, std::abs(b[i]));
  }
  for (double v : x) x_norm = std::max(x_norm, std::abs(v));
  const double denom = std::numeric_limits<double>::epsilon() *
                       (a_norm * x_norm + b_norm) * static_cast<double>(n);
  if (denom == 0.0) return r_norm == 0.0 ? 0.0 : INFINITY;
  return r_norm / denom;
}

/// Entries uniform in [-1, 1) plus n on the diagonal.
inline Matrix random_diag_dominant(std::size_t n, CounterRng& rng) {
  Matrix m = random_matrix(n, n, rng);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += static_cast<double>(n);
  return m;
}

}  // namespace rvvlab
