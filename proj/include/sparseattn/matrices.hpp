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

// Target matrices A: sparse, right stochastic, with a bounded number of
// nonzeros per row/column and bounded within-row variation.

#ifndef SPARSEATTN_MATRICES_HPP_
#define SPARSEATTN_MATRICES_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sparseattn/common.hpp"

namespace sparseattn {

/// Parameters of the approximation problem.
///   L      sequence length, L > 1
///   k      max nonzeros per row and per column, 1 <= k <= L
///   gamma  within-row variation bound, gamma >= 1
///   eps1   zero-entry ratio threshold, 0 < eps1 < 1
///   eps2   nonzero-ratio log tolerance, 0 < eps2 < sqrt(2)
struct ApproxParams {
  int L = 2;
  int k = 1;
  double gamma = 1.0;
  double eps1 = 0.15;
  double eps2 = 1.41;
  bool causal = false;

  /// Throws Error naming the first violated constraint.
  void check() const;
};

struct Entry {
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Coordinate-list matrix kept sorted row-major. The constructor enforces the
/// structural invariants (indices in range, no duplicates, positive values,
/// lower-triangular when causal). The stochastic and k/gamma bounds are
/// checked by validate(), since files may legitimately carry violations that
/// callers want reported rather than thrown.
class SparseStochasticMatrix {
 public:
  SparseStochasticMatrix() = default;
  SparseStochasticMatrix(int L, int k, double gamma, bool causal,
                         std::vector<Entry> entries);

  int size() const { return L_; }
  /// Declared bounds (the COO header), not measured ones.
  int k() const { return k_; }
  double gamma() const { return gamma_; }
  bool causal() const { return causal_; }

  std::size_t nnz() const { return entries_.size(); }
  std::span<const Entry> entries() const { return entries_; }
  std::span<const Entry> row(int i) const;

  Matrix to_dense() const;

  friend bool operator==(const SparseStochasticMatrix&,
                         const SparseStochasticMatrix&) = default;

 private:
  int L_ = 0;
  int k_ = 1;
  double gamma_ = 1.0;
  bool causal_ = false;
  std::vector<Entry> entries_;
  std::vector<std::size_t> row_ptr_;
};

/// Samples A by two greedy passes over positions in seeded random order.
///
/// The generator stream is consumed as: row permutation, column permutation,
/// then one coin flip per inserted entry. Pass 1 walks permuted rows (outer)
/// by permuted columns (inner), pass 2 permuted columns by permuted rows; an
/// entry is inserted wherever neither its row nor its column already holds k
/// nonzeros. Values are 1 or gamma by the coin flip, and each row is then
/// scaled to sum to 1.
///
/// In causal mode only positions with col <= row are candidates, and pass 1
/// visits rows in ascending index order; otherwise a later row could use up
/// column 0 and leave row 0 without any admissible position.
SparseStochasticMatrix generate(const ApproxParams& params, std::uint64_t seed);

struct Violation {
  std::string invariant;  // "stochastic", "row_nnz", "col_nnz", ...
  int row = -1;
  int col = -1;
  std::string detail;
};

struct ValidationReport {
  bool passed = true;
  std::vector<Violation> violations;
};

/// Tolerance on row sums.
inline constexpr double kRowSumTolerance = 1e-12;

ValidationReport validate(const SparseStochasticMatrix& A,
                          const ApproxParams& params);

/// Minimum nonzero value of each row. Throws on an empty row.
Vector min_nonzero_rows(const SparseStochasticMatrix& A);

// COO text format:
//   line 1: "L k gamma causal"   (causal is 0 or 1)
//   then:   "i j value" per entry, 0-based, sorted row-major.
SparseStochasticMatrix read_coo(const std::filesystem::path& path);
SparseStochasticMatrix parse_coo(const std::string& text);
void write_coo(const SparseStochasticMatrix& A,
               const std::filesystem::path& path);
std::string format_coo(const SparseStochasticMatrix& A);

// Dense text format: "rows cols" header, then one row per line.
Matrix read_dense(const std::filesystem::path& path);
void write_dense(const Matrix& m, const std::filesystem::path& path);

}  // namespace sparseattn

#endif  // SPARSEATTN_MATRICES_HPP_
