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

#ifndef SPARSEATTN_ATTENTION_HPP_
#define SPARSEATTN_ATTENTION_HPP_

#include "sparseattn/common.hpp"
#include "sparseattn/construct.hpp"

namespace sparseattn {

struct AttentionMatrix {
  Matrix M;
  bool causal = false;
};

/// Z = X WQ WK^T X^T, evaluated as (X WQ)(X WK)^T.
Matrix logits(const AttentionInputs& ai);

/// Row-wise softmax with per-row max subtraction.
AttentionMatrix sam(const Matrix& Z);

/// Causal variant: row i is the softmax of Z[i, 0..i]; entries above the
/// diagonal are exactly 0.
AttentionMatrix csam(const Matrix& Z);

}  // namespace sparseattn

#endif  // SPARSEATTN_ATTENTION_HPP_
