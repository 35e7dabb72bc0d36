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

#include "sparseattn/concentration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <thread>

#include "sparseattn/construct.hpp"

namespace sparseattn {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::uint64_t sample_seed(std::uint64_t seed, int p, int m, ProjectionMode mode,
                          std::int64_t s) {
  return hash64({seed, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(m),
                 static_cast<std::uint64_t>(mode), static_cast<std::uint64_t>(s)});
}

// Estimation errors (estimate - x^T y) for draws 0..n, split over threads.
std::vector<double> sample_errors(const Vector& x, const Vector& y,
                                  const JltParams& params, std::uint64_t seed,
                                  int threads) {
  const double truth = x.dot(y);
  std::vector<double> err(static_cast<std::size_t>(params.n_samples));
  auto work = [&](int begin, int end) {
    for (int s = begin; s < end; ++s) {
      err[static_cast<std::size_t>(s)] =
          project_pair(x, y, params,
                       sample_seed(seed, params.p, params.m, params.mode, s)) -
          truth;
    }
  };
  threads = std::max(1, std::min(threads, params.n_samples));
  if (threads == 1) {
    work(0, params.n_samples);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (params.n_samples + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const int b = w * chunk;
      const int e = std::min(params.n_samples, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return err;
}

}  // namespace

std::string_view to_string(ProjectionMode mode) {
  return mode == ProjectionMode::kOrthogonal ? "orthogonal" : "iid";
}

void JltParams::check() const {
  if (p < 1) throw Error("p must be positive");
  if (m < 1 || m > p) throw Error("m must satisfy 1 <= m <= p");
  if (!(sigma > 0.0)) throw Error("sigma must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("epsilon must lie in (0, 1)");
  if (n_samples < 1) throw Error("n_samples must be >= 1");
}

Matrix projection_matrix(int p, int m, double sigma, ProjectionMode mode,
                         std::uint64_t seed) {
  if (m < 1 || m > p) throw Error("projection requires 1 <= m <= p");
  if (mode == ProjectionMode::kOrthogonal) {
    const StiefelSample s = sample_stiefel(p, m, seed);
    return (sigma * std::sqrt(static_cast<double>(p))) * s.Y.transpose();
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix r(m, p);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) r(i, j) = normal(rng);
  return r;
}

double project_pair(const Vector& x, const Vector& y, const JltParams& params,
                    std::uint64_t seed) {
  if (x.size() != params.p || y.size() != params.p)
    throw Error("project_pair: vectors must have length p");
  const Matrix r = projection_matrix(params.p, params.m, params.sigma, params.mode, seed);
  const Vector rx = r * x;
  const Vector ry = r * y;
  return rx.dot(ry) / (params.m * params.sigma * params.sigma);
}

double tail_estimate(const Vector& x, const Vector& y, const JltParams& params,
                     std::uint64_t seed) {
  params.check();
  const double threshold = params.epsilon * x.norm() * y.norm();
  const auto err = sample_errors(x, y, params, seed, 1);
  std::int64_t hits = 0;
  for (double e : err) hits += std::abs(e) >= threshold;
  return static_cast<double>(hits) / params.n_samples;
}

double theoretical_tail(int p, int m, double epsilon, ProjectionMode mode) {
  const double base = std::exp(-m * epsilon * epsilon / 8.0);
  if (mode == ProjectionMode::kOrthogonal) return (2.0 - 2.0 / (p + 2.0)) * base;
  return 2.0 * base;
}

void BenchConfig::check() const {
  if (n_samples < 1) throw Error("n_samples must be >= 1");
  if (p_grid.empty() || m_grid.empty() || eps_grid.empty())
    throw Error("bench grids must be nonempty");
  for (int p : p_grid)
    for (int m : m_grid)
      if (m < 1 || m > p) throw Error("every m must satisfy 1 <= m <= p");
  for (double e : eps_grid)
    if (!(e > 0.0 && e < 1.0)) throw Error("epsilon must lie in (0, 1)");
  if (!(sigma > 0.0)) throw Error("sigma must be positive");
}

std::pair<Vector, Vector> bench_vectors(int p, std::uint64_t seed) {
  std::mt19937_64 rng(hash64({seed, static_cast<std::uint64_t>(p), 0x7e57ULL}));
  std::normal_distribution<double> normal;
  Vector x(p), z(p);
  for (int i = 0; i < p; ++i) x[i] = normal(rng);
  for (int i = 0; i < p; ++i) z[i] = normal(rng);
  x.normalize();
  z -= z.dot(x) * x;
  z.normalize();
  const Vector y = 0.5 * x + std::sqrt(0.75) * z;
  return {x, y};
}

BenchResult run_jlt_bench(const BenchConfig& cfg, int threads) {
  cfg.check();
  BenchResult result;
  const ProjectionMode modes[] = {ProjectionMode::kOrthogonal, ProjectionMode::kIid};
  for (int p : cfg.p_grid) {
    const auto [x, y] = bench_vectors(p, cfg.seed);
    const double scale = x.norm() * y.norm();
    for (int m : cfg.m_grid) {
      std::vector<double> errs[2];
      for (int k = 0; k < 2; ++k) {
        JltParams params{p, m, cfg.sigma, modes[k], cfg.eps_grid.front(), cfg.n_samples};
        errs[k] = sample_errors(x, y, params, cfg.seed, threads);
      }
      for (double eps : cfg.eps_grid) {
        for (int k = 0; k < 2; ++k) {
          std::int64_t hits = 0;
          for (double e : errs[k]) hits += std::abs(e) >= eps * scale;
          result.rows.push_back({p, m, eps, modes[k],
                                 static_cast<double>(hits) / cfg.n_samples,
                                 theoretical_tail(p, m, eps, modes[k]), cfg.n_samples});
        }
      }
      MseComparison cmp{p, m};
      const double n = cfg.n_samples;
      double sum_d = 0.0, sum_d2 = 0.0;
      for (int s = 0; s < cfg.n_samples; ++s) {
        const double eo = errs[0][static_cast<std::size_t>(s)];
        const double ei = errs[1][static_cast<std::size_t>(s)];
        cmp.mse_orthogonal += eo * eo / n;
        cmp.mse_iid += ei * ei / n;
        const double d = eo * eo - ei * ei;
        sum_d += d;
        sum_d2 += d * d;
      }
      cmp.mean_diff = sum_d / n;
      const double var = n > 1 ? (sum_d2 - n * cmp.mean_diff * cmp.mean_diff) / (n - 1) : 0.0;
      cmp.se_diff = std::sqrt(std::max(var, 0.0) / n);
      result.mse.push_back(cmp);
    }
  }
  return result;
}

std::string format_bench_row(const BenchRow& row) {
  return std::to_string(row.p) + "," + std::to_string(row.m) + "," +
         shortest(row.epsilon) + "," + std::string(to_string(row.mode)) + "," +
         shortest(row.empirical_tail) + "," + shortest(row.theoretical_tail) +
         "," + std::to_string(row.n_samples);
}

}  // namespace sparseattn
