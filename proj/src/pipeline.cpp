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

#include "sparseattn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace sparseattn {
namespace {

constexpr Eigen::Index kRowBlock = 64;

}  // namespace

std::uint64_t redraw_seed(std::uint64_t base, int d, std::int64_t t) {
  return hash64({base, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(t)});
}

std::int64_t redraw_budget(double q, int L) {
  return std::max<std::int64_t>(1, std::llround(q * L));
}

int default_thread_count() {
  if (const char* env = std::getenv("SPARSEATTN_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Pipeline::Pipeline(SparseStochasticMatrix A, double eps1, double eps2,
                   bool causal)
    : A_(std::move(A)),
      causal_(causal),
      log_gap_(build_log_gap(A_, eps1, eps2)),
      factors_(svd_factor(log_gap_)),
      checker_(A_, eps1, eps2, causal) {}

bool Pipeline::run(int d, const StiefelSample& y, bool stop_early,
                   ApproxReport& report, Matrix* z_out) const {
  const Eigen::Index L = A_.size();
  const double scale = 2.0 * static_cast<double>(L) / d;
  Matrix x2;
  x2.noalias() = factors_.V * y.Y;
  if (z_out) z_out->resize(L, L);

  bool ok = true;
  Matrix x1, z;
  for (Eigen::Index r0 = 0; r0 < L; r0 += kRowBlock) {
    const Eigen::Index nb = std::min(kRowBlock, L - r0);
    x1.noalias() = scale * (factors_.D.middleRows(r0, nb) * y.Y);
    z.noalias() = x1 * x2.transpose();
    for (Eigen::Index r = 0; r < nb; ++r) {
      if (!checker_.add_row(static_cast<int>(r0 + r), z.row(r).data(), report)) {
        ok = false;
        if (stop_early) return false;
      }
    }
    if (z_out) z_out->middleRows(r0, nb) = z;
  }
  return ok;
}

bool Pipeline::passes(int d, std::uint64_t seed) const {
  if (d <= 0 || d % 2 != 0) throw Error("d must be a positive even integer");
  const StiefelSample y = sample_stiefel(A_.size(), d / 2, seed);
  ApproxReport report;
  return run(d, y, true, report, nullptr);
}

Pipeline::Evaluation Pipeline::evaluate(int d, std::uint64_t seed) const {
  if (d <= 0 || d % 2 != 0) throw Error("d must be a positive even integer");
  Evaluation ev;
  ev.Y = sample_stiefel(A_.size(), d / 2, seed);
  run(d, ev.Y, false, ev.report, &ev.Z);
  return ev;
}

Pipeline::Search Pipeline::search(int d, std::uint64_t base,
                                  std::int64_t budget, int threads) const {
  if (d <= 0 || d % 2 != 0) throw Error("d must be a positive even integer");
  if (d / 2 > A_.size()) throw Error("d must not exceed 2L");
  threads = std::max(1, threads);
  Search result;
  for (std::int64_t t0 = 0; t0 < budget; t0 += threads) {
    const int n = static_cast<int>(std::min<std::int64_t>(threads, budget - t0));
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    if (n == 1) {
      ok[0] = passes(d, redraw_seed(base, d, t0));
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(static_cast<std::size_t>(n));
      for (int w = 0; w < n; ++w) {
        pool.emplace_back([&, w] {
          ok[static_cast<std::size_t>(w)] = passes(d, redraw_seed(base, d, t0 + w));
        });
      }
    }
    for (int w = 0; w < n; ++w) {
      if (ok[static_cast<std::size_t>(w)]) {
        result.pass_index = t0 + w;
        result.redraws_used = t0 + w + 1;
        return result;
      }
    }
  }
  result.redraws_used = budget;
  return result;
}

}  // namespace sparseattn
