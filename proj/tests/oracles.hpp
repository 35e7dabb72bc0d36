// Copyright 2026 The sparseattn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test-only reference implementations. These deliberately take the slow,
// literal route and share no code with the library paths they check.

#ifndef SPARSEATTN_TESTS_ORACLES_HPP_
#define SPARSEATTN_TESTS_ORACLES_HPP_

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "sparseattn/common.hpp"
#include "sparseattn/matrices.hpp"
#include "sparseattn/verify.hpp"

namespace oracle {

using sparseattn::Matrix;

inline Matrix random_matrix(int rows, int cols, double lo, double hi,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

/// Z[i][j] = sum_{a,b,c} X[i,a] WQ[a,b] WK[c,b] X[j,c], by explicit loops.
inline Matrix quadruple_product(const Matrix& X, const Matrix& WQ, const Matrix& WK) {
  const auto L = X.rows(), h = X.cols(), d = WQ.cols();
  Matrix z = Matrix::Zero(L, L);
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = 0; j < L; ++j) {
      long double s = 0;
      for (Eigen::Index a = 0; a < h; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
          for (Eigen::Index c = 0; c < h; ++c)
            s += static_cast<long double>(X(i, a)) * WQ(a, b) * WK(c, b) * X(j, c);
      z(i, j) = static_cast<double>(s);
    }
  return z;
}

/// exp then row-normalize, no shift; causal zeroes j > i before normalizing.
inline Matrix naive_softmax(const Matrix& Z, bool causal) {
  Matrix m(Z.rows(), Z.cols());
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    long double sum = 0;
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
      m(i, j) = (causal && j > i) ? 0.0 : std::exp(Z(i, j));
      sum += m(i, j);
    }
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
      m(i, j) = static_cast<double>(m(i, j) / sum);
  }
  return m;
}

/// O(L^3) enumeration of every triple in the log domain.
struct NaiveReport {
  bool passed = true;
  double worst_zero = -INFINITY;
  double worst_dev = 0.0;
  long long triples = 0;
  std::optional<sparseattn::TripleViolation> first;
};

inline NaiveReport naive_conditions(const Matrix& Z, const Matrix& A,
                                    double eps1, double eps2, bool causal) {
  NaiveReport r;
  const auto L = A.rows();
  const double le1 = std::log(eps1);
  for (Eigen::Index i = 0; i < L; ++i) {
    const Eigen::Index n = causal ? i + 1 : L;
    for (Eigen::Index j1 = 0; j1 < n; ++j1)
      for (Eigen::Index j2 = 0; j2 < n; ++j2) {
        if (A(i, j2) == 0.0) continue;
        bool bad = false;
        sparseattn::ViolationKind kind;
        if (A(i, j1) == 0.0) {
          const double v = Z(i, j1) - Z(i, j2);
          r.worst_zero = std::max(r.worst_zero, v);
          bad = !(v < le1);
          kind = sparseattn::ViolationKind::kZeroRatio;
        } else {
          if (j1 == j2) continue;
          const double v = std::abs(Z(i, j1) - Z(i, j2) -
                                    (std::log(A(i, j1)) - std::log(A(i, j2))));
          r.worst_dev = std::max(r.worst_dev, v);
          bad = !(v < eps2);
          kind = sparseattn::ViolationKind::kNonzeroRatio;
        }
        ++r.triples;
        if (bad) {
          r.passed = false;
          if (!r.first)
            r.first = sparseattn::TripleViolation{static_cast<int>(i), static_cast<int>(j1),
                                                  static_cast<int>(j2), kind};
        }
      }
  }
  return r;
}

}  // namespace oracle

#endif  // SPARSEATTN_TESTS_ORACLES_HPP_
