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

#ifndef SPARSEATTN_PIPELINE_HPP_
#define SPARSEATTN_PIPELINE_HPP_

#include <cstdint>
#include <optional>

#include "sparseattn/attention.hpp"
#include "sparseattn/construct.hpp"
#include "sparseattn/matrices.hpp"
#include "sparseattn/verify.hpp"

namespace sparseattn {

/// Seed of Stiefel redraw t at width d, derived from a per-run base seed.
std::uint64_t redraw_seed(std::uint64_t base, int d, std::int64_t t);

/// Number of redraws per candidate d: round(q * L), at least 1.
std::int64_t redraw_budget(double q, int L);

/// Thread count from SPARSEATTN_THREADS, else the hardware concurrency.
int default_thread_count();

/// A target matrix prepared for repeated projection draws: B and its SVD are
/// computed once, each draw samples a fresh Y.
///
/// Logits are formed in row blocks as (c^2 D Y)(V Y)^T with c^2 = 2L/d, and
/// the same arithmetic is used by passes() and evaluate(), so a draw that
/// passes the early-exit check also passes the full report.
class Pipeline {
 public:
  Pipeline(SparseStochasticMatrix A, double eps1, double eps2, bool causal);
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const SparseStochasticMatrix& target() const { return A_; }
  const LogGapMatrix& log_gap() const { return log_gap_; }
  const Factorization& factorization() const { return factors_; }
  bool causal() const { return causal_; }

  /// Early-exit check of one draw; stops at the first failing row.
  bool passes(int d, std::uint64_t seed) const;

  struct Evaluation {
    ApproxReport report;
    Matrix Z;
    StiefelSample Y;
  };
  /// Full report and logits for one draw.
  Evaluation evaluate(int d, std::uint64_t seed) const;

  struct Search {
    std::optional<std::int64_t> pass_index;
    std::int64_t redraws_used = 0;
  };
  /// Tries redraws t = 0, 1, ... < budget with seeds redraw_seed(base, d, t)
  /// and returns the smallest passing t. Redraws run in batches of `threads`;
  /// the result does not depend on the thread count.
  Search search(int d, std::uint64_t base, std::int64_t budget,
                int threads = 1) const;

 private:
  // Runs the blocked logit evaluation. If z_out is non-null the full Z is
  // stored. Returns whether every row passed (early exit when stop_early).
  bool run(int d, const StiefelSample& y, bool stop_early, ApproxReport& report,
           Matrix* z_out) const;

  SparseStochasticMatrix A_;
  bool causal_;
  LogGapMatrix log_gap_;
  Factorization factors_;
  ConditionChecker checker_;  // refers to A_
};

}  // namespace sparseattn

#endif  // SPARSEATTN_PIPELINE_HPP_
