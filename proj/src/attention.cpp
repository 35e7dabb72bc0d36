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

#include "sparseattn/attention.hpp"

#include <algorithm>
#include <cmath>

namespace sparseattn {
namespace {

// Softmax of z[0..n) into out[0..n).
void softmax_prefix(const double* z, double* out, Eigen::Index n) {
  double m = z[0];
  for (Eigen::Index j = 1; j < n; ++j) m = std::max(m, z[j]);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    out[j] = std::exp(z[j] - m);
    sum += out[j];
  }
  const double inv = 1.0 / sum;
  for (Eigen::Index j = 0; j < n; ++j) out[j] *= inv;
}

}  // namespace

Matrix logits(const AttentionInputs& ai) {
  const Matrix q = ai.X * ai.WQ;
  const Matrix k = ai.X * ai.WK;
  Matrix z;
  z.noalias() = q * k.transpose();
  return z;
}

AttentionMatrix sam(const Matrix& Z) {
  if (Z.rows() != Z.cols()) throw Error("sam expects a square logit matrix");
  AttentionMatrix a{Matrix(Z.rows(), Z.cols()), false};
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    softmax_prefix(Z.row(i).data(), a.M.row(i).data(), Z.cols());
  return a;
}

AttentionMatrix csam(const Matrix& Z) {
  if (Z.rows() != Z.cols()) throw Error("csam expects a square logit matrix");
  AttentionMatrix a{Matrix::Zero(Z.rows(), Z.cols()), true};
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    softmax_prefix(Z.row(i).data(), a.M.row(i).data(), i + 1);
  return a;
}

}  // namespace sparseattn
