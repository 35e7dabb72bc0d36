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

// Experiment harness: search for the smallest working width d_min over a
// grid of d values, across sequence lengths L and redraw budgets q * L.
//
// Seeds: each (L, trial) gets base = hash64(master_seed, L, trial). A is
// generated from base, and redraw t at width d uses redraw_seed(base, d, t).
// q does not enter any seed, so different q values see the same A and the
// same sequence of draws.

#ifndef SPARSEATTN_SWEEP_HPP_
#define SPARSEATTN_SWEEP_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sparseattn/matrices.hpp"
#include "sparseattn/pipeline.hpp"

namespace sparseattn {

inline constexpr int kNotFound = -1;

struct SweepConfig {
  ApproxParams params;  // params.L is replaced by each L_grid value
  std::vector<int> L_grid;
  int d_lower = 200;
  int d_upper = 600;
  int d_points = 30;
  double q = 1.0;
  int trials_per_L = 5;
  std::uint64_t master_seed = 0;

  void check() const;

  /// d_points values evenly spaced over [d_lower, d_upper] (inclusive), each
  /// rounded to the nearest even integer, ascending, deduplicated.
  std::vector<int> d_grid() const;

  /// d_grid() with values above 2L replaced by 2L (then deduplicated). d = 2L
  /// is the largest width the construction admits.
  std::vector<int> d_grid_for(int L) const;
};

struct SweepRecord {
  int L = 0;
  int trial = 0;
  double q = 1.0;
  int d_min = kNotFound;
  double theoretical_d = 0.0;
  std::int64_t redraws_used = 0;
  std::uint64_t seed = 0;  // per-(L, trial) base seed

  bool found() const { return d_min != kNotFound; }
  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

/// Upper bound on the width needed for a passing draw:
///   32 eps2^-2 k^2 max(log gamma - log eps1 + eps2, 1)^2
///     * (2 log L + log(L - 1) + log 2)
double theoretical_d(const ApproxParams& params, int L);

std::uint64_t trial_seed(std::uint64_t master_seed, int L, int trial);

/// Walks cfg.d_grid_for(L) upward; at each d tries up to redraw_budget(q, L)
/// draws and stops at the first d with a passing draw.
SweepRecord find_dmin(const SparseStochasticMatrix& A, const SweepConfig& cfg,
                      std::uint64_t seed, int trial = 0, int threads = 1);

struct SweepOptions {
  /// If set, records are appended to this CSV as they complete and (L,
  /// trial, q) rows already present are skipped.
  std::filesystem::path csv_path;
  int threads = 1;
  /// Called after each new record.
  std::function<void(const SweepRecord&)> on_record;
};

struct SweepOutcome {
  std::vector<SweepRecord> records;  // grid order, including resumed rows
  std::vector<std::string> failures;
  std::size_t resumed = 0;
};

SweepOutcome run_sweep(const SweepConfig& cfg, const SweepOptions& opts = {});

/// run_sweep repeated per q on the same A sequence; records are tagged
/// with their q.
SweepOutcome q_sweep(const SweepConfig& cfg, std::span<const double> q_values,
                     const SweepOptions& opts = {});

struct LogFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
};

/// Least squares d_min = a + b log L over found records. r2 is 1 when d_min
/// has zero variance. Throws if fewer than 2 distinct L have a found d_min.
LogFit log_fit(std::span<const SweepRecord> records);

// CSV: "L,trial,q,d_min,theoretical_d,redraws_used,seed", NOT_FOUND as -1.
inline constexpr const char* kSweepCsvHeader =
    "L,trial,q,d_min,theoretical_d,redraws_used,seed";
std::string format_record(const SweepRecord& r);
std::vector<SweepRecord> read_records(const std::filesystem::path& path);

/// Parses flat "key = value" lines ('#' starts a comment). Recognised keys:
/// k, gamma, eps1, eps2, causal, L_grid, d_lower, d_upper, d_points, q,
/// trials_per_L, master_seed and (for q sweeps) q_values. Lists are
/// comma-separated. Every bad line is reported in the thrown Error.
struct ParsedConfig {
  SweepConfig config;
  std::vector<double> q_values;
};
ParsedConfig parse_sweep_config(const std::string& text);
ParsedConfig read_sweep_config(const std::filesystem::path& path);

}  // namespace sparseattn

#endif  // SPARSEATTN_SWEEP_HPP_
