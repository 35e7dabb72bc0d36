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

// Monte Carlo benchmark of dot-product preservation under random projections
// R (m x p): the estimate (Rx)^T (Ry) / (m sigma^2) of x^T y.
//
//   orthogonal  rows of R are mutually orthogonal with length sigma sqrt(p)
//               (sigma sqrt(p) times the columns of a Haar Stiefel sample)
//   iid         rows of R are independent sigma N(0, I_p)

#ifndef SPARSEATTN_CONCENTRATION_HPP_
#define SPARSEATTN_CONCENTRATION_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sparseattn/common.hpp"

namespace sparseattn {

enum class ProjectionMode { kOrthogonal, kIid };

std::string_view to_string(ProjectionMode mode);

struct JltParams {
  int p = 128;
  int m = 32;
  double sigma = 1.0;
  ProjectionMode mode = ProjectionMode::kOrthogonal;
  double epsilon = 0.5;
  int n_samples = 10000;

  void check() const;
};

/// m x p projection matrix for one draw.
Matrix projection_matrix(int p, int m, double sigma, ProjectionMode mode,
                         std::uint64_t seed);

/// The normalized estimate (Rx)^T (Ry) / (m sigma^2) for one draw.
double project_pair(const Vector& x, const Vector& y, const JltParams& params,
                    std::uint64_t seed);

/// Fraction of n_samples draws with |estimate - x^T y| >= eps |x| |y|.
double tail_estimate(const Vector& x, const Vector& y, const JltParams& params,
                     std::uint64_t seed = 0);

/// Orthogonal: (2 - 2/(p+2)) exp(-m eps^2 / 8). Iid: 2 exp(-m eps^2 / 8).
double theoretical_tail(int p, int m, double epsilon, ProjectionMode mode);

struct BenchConfig {
  std::vector<int> p_grid{128, 256};
  std::vector<int> m_grid{8, 16, 32, 64};
  std::vector<double> eps_grid{0.1, 0.25, 0.5};
  int n_samples = 10000;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  void check() const;
};

struct BenchRow {
  int p = 0;
  int m = 0;
  double epsilon = 0.0;
  ProjectionMode mode = ProjectionMode::kOrthogonal;
  double empirical_tail = 0.0;
  double theoretical_tail = 0.0;
  int n_samples = 0;
};

/// Paired squared-error comparison of the two estimators at one (p, m).
struct MseComparison {
  int p = 0;
  int m = 0;
  double mse_orthogonal = 0.0;
  double mse_iid = 0.0;
  double mean_diff = 0.0;  // mean of (err_orth^2 - err_iid^2)
  double se_diff = 0.0;    // its standard error
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<MseComparison> mse;
};

/// Test vectors used by the bench at dimension p: unit-norm Gaussian x and a
/// y correlated with it (x^T y about 0.5).
std::pair<Vector, Vector> bench_vectors(int p, std::uint64_t seed);

/// Runs every (p, m, mode) cell once and reads off all epsilons from the same
/// draws. Rows come out ordered by p, m, epsilon, mode.
BenchResult run_jlt_bench(const BenchConfig& cfg, int threads = 1);

inline constexpr const char* kBenchCsvHeader =
    "p,m,epsilon,mode,empirical_tail,theoretical_tail,n_samples";
std::string format_bench_row(const BenchRow& row);

}  // namespace sparseattn

#endif  // SPARSEATTN_CONCENTRATION_HPP_
