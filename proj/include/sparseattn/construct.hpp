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

// Constructive pipeline turning a target A into self-attention inputs:
//
//   A --build_log_gap--> B --svd_factor--> (D = U S, V)
//     --sample_stiefel + compress--> X1 = c D Y, X2 = c V Y,  c = sqrt(2L/d)
//     --assemble--> X = [X1 | X2 | 0], WQ = [I_d | 0]^T, WK = [Omega_d | 0]^T
//
// so that X WQ WK^T X^T = X1 X2^T, an unbiased estimate of B.

#ifndef SPARSEATTN_CONSTRUCT_HPP_
#define SPARSEATTN_CONSTRUCT_HPP_

#include <cstdint>
#include <filesystem>

#include "sparseattn/common.hpp"
#include "sparseattn/matrices.hpp"

namespace sparseattn {

/// B[i,j] = log A[i,j] - log minnz_i - log eps1 + eps2 on the support of A,
/// exactly 0 elsewhere.
struct LogGapMatrix {
  Matrix B;
  Vector min_nz;
  double eps1 = 0.0;
  double eps2 = 0.0;

  int size() const { return static_cast<int>(B.rows()); }
};

struct Factorization {
  Matrix D;      // U * diag(sigma)
  Matrix V;      // orthogonal
  Vector sigma;  // descending, nonnegative
};

/// L x half_d matrix with orthonormal columns, Haar distributed.
struct StiefelSample {
  Matrix Y;
  std::uint64_t seed = 0;
};

struct ProjectionPair {
  Matrix X1;
  Matrix X2;
  int d = 0;
};

struct AttentionInputs {
  Matrix X;   // L x d_hid
  Matrix WQ;  // d_hid x d
  Matrix WK;  // d_hid x d
  int d = 0;
  int d_hid = 0;
};

LogGapMatrix build_log_gap(const SparseStochasticMatrix& A, double eps1,
                           double eps2);

/// C = eps1 exp(-eps2) diag(min_nz) exp(B). Equals A on its support and is at
/// most eps1 elsewhere.
Matrix reconstruct_c(const LogGapMatrix& lg);

/// Full dense SVD of B. Throws Error if the solver reports non-convergence.
Factorization svd_factor(const LogGapMatrix& lg);
Factorization svd_factor(const Matrix& B);

/// Q factor of an L x half_d standard Gaussian matrix, each column multiplied
/// by the sign of the matching R diagonal entry (0 counts as +).
StiefelSample sample_stiefel(int L, int half_d, std::uint64_t seed);

ProjectionPair compress(const Factorization& f, const StiefelSample& y, int d);

/// Requires d <= d_hid <= 2L.
AttentionInputs assemble(const ProjectionPair& p, int d_hid);

/// Text dump of X, WQ and WK, each in the dense text format, separated by a
/// "# name" line.
void write_attention_inputs(const AttentionInputs& ai,
                            const std::filesystem::path& path);

}  // namespace sparseattn

#endif  // SPARSEATTN_CONSTRUCT_HPP_
