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

// Ratio conditions an attention matrix M must meet to approximate A.
// For every row i:
//   (zero)    A[i,j1] == 0, A[i,j2] != 0:  M[i,j1] / M[i,j2] < eps1
//   (nonzero) A[i,j1], A[i,j2] != 0, j1 != j2:
//             |log(M[i,j1] / M[i,j2]) - log(A[i,j1] / A[i,j2])| < eps2
// In causal mode only j1, j2 <= i take part. Since softmax ratios are exp of
// logit differences, both conditions can be checked on Z = log-domain
// logits without forming M.

#ifndef SPARSEATTN_VERIFY_HPP_
#define SPARSEATTN_VERIFY_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sparseattn/attention.hpp"
#include "sparseattn/matrices.hpp"

namespace sparseattn {

enum class ViolationKind { kZeroRatio, kNonzeroRatio, kNonFinite };

std::string_view to_string(ViolationKind kind);

struct TripleViolation {
  int i = 0;
  int j1 = 0;
  int j2 = 0;
  ViolationKind kind = ViolationKind::kZeroRatio;

  friend bool operator==(const TripleViolation&, const TripleViolation&) = default;
};

/// Outcome of a condition check. first_violation is the lexicographically
/// smallest failing (i, j1, j2) over both condition kinds.
struct ApproxReport {
  bool passed = true;
  /// max over zero-condition triples of log(M[i,j1] / M[i,j2]); compare to
  /// log eps1. -inf when there are no such triples.
  double worst_zero_ratio_log = -std::numeric_limits<double>::infinity();
  /// max over nonzero-condition triples of the log-ratio deviation; compare
  /// to eps2.
  double worst_nonzero_dev = 0.0;
  std::int64_t n_triples_checked = 0;
  std::optional<TripleViolation> first_violation;
};

/// Row-at-a-time log-domain checker. Each row costs O(L + nnz_i^2).
class ConditionChecker {
 public:
  ConditionChecker(const SparseStochasticMatrix& A, double eps1, double eps2,
                   bool causal);

  /// Folds row i of Z (length L) into the report; returns whether the row
  /// passed.
  bool add_row(int i, const double* z, ApproxReport& report) const;

  int size() const { return A_->size(); }

 private:
  const SparseStochasticMatrix* A_;
  double log_eps1_;
  double eps2_;
  bool causal_;
  std::vector<double> log_values_;  // log A, aligned with A.entries()
};

/// Log-domain check on logits Z.
ApproxReport check_conditions(const Matrix& Z, const SparseStochasticMatrix& A,
                              double eps1, double eps2, bool causal);

/// Literal ratio check on M. Non-finite ratios count as violations of kind
/// kNonFinite. Intended as an oracle for small L, where M's entries do not
/// underflow.
ApproxReport check_direct(const AttentionMatrix& M,
                          const SparseStochasticMatrix& A, double eps1,
                          double eps2, bool causal);

/// {passed, worst_zero_ratio_log, worst_nonzero_dev, n_triples_checked,
///  first_violation: null | {i, j1, j2, kind}}; -inf is written as null.
nlohmann::json to_json(const ApproxReport& report);

}  // namespace sparseattn

#endif  // SPARSEATTN_VERIFY_HPP_
