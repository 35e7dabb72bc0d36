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

#include "sparseattn/verify.hpp"

#include <algorithm>
#include <cmath>

namespace sparseattn {

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kZeroRatio: return "zero_ratio";
    case ViolationKind::kNonzeroRatio: return "nonzero_ratio";
    case ViolationKind::kNonFinite: return "non_finite";
  }
  return "unknown";
}

namespace {

// Entries of row i that take part in the check.
std::span<const Entry> active_entries(const SparseStochasticMatrix& A, int i,
                                      int ncols) {
  auto row = A.row(i);
  auto end = std::partition_point(row.begin(), row.end(),
                                  [&](const Entry& e) { return e.col < ncols; });
  return row.first(static_cast<std::size_t>(end - row.begin()));
}

void record(ApproxReport& report, TripleViolation v) {
  report.passed = false;
  if (!report.first_violation) report.first_violation = v;
}

}  // namespace

ConditionChecker::ConditionChecker(const SparseStochasticMatrix& A, double eps1,
                                   double eps2, bool causal)
    : A_(&A), log_eps1_(std::log(eps1)), eps2_(eps2), causal_(causal) {
  log_values_.reserve(A.nnz());
  for (const Entry& e : A.entries()) log_values_.push_back(std::log(e.value));
}

bool ConditionChecker::add_row(int i, const double* z,
                               ApproxReport& report) const {
  const int L = A_->size();
  const int ncols = causal_ ? i + 1 : L;
  const auto nz = active_entries(*A_, i, ncols);
  const std::size_t nnz = nz.size();
  if (nnz == 0) return true;
  const double* logs =
      log_values_.data() + (nz.data() - A_->entries().data());

  double z_min_nz = z[nz[0].col];
  for (const Entry& e : nz) z_min_nz = std::min(z_min_nz, z[e.col]);

  double z_max_zero = -std::numeric_limits<double>::infinity();
  std::size_t p = 0;
  for (int j = 0; j < ncols; ++j) {
    if (p < nnz && nz[p].col == j) {
      ++p;
      continue;
    }
    z_max_zero = std::max(z_max_zero, z[j]);
  }
  const double zero_ratio = z_max_zero - z_min_nz;

  double dev = 0.0;
  for (std::size_t a = 0; a < nnz; ++a)
    for (std::size_t b = 0; b < nnz; ++b)
      if (a != b)
        dev = std::max(dev, std::abs(z[nz[a].col] - z[nz[b].col] -
                                     (logs[a] - logs[b])));

  const auto zeros = static_cast<std::int64_t>(ncols) - static_cast<std::int64_t>(nnz);
  const auto n = static_cast<std::int64_t>(nnz);
  report.n_triples_checked += zeros * n + n * (n - 1);
  report.worst_zero_ratio_log = std::max(report.worst_zero_ratio_log, zero_ratio);
  report.worst_nonzero_dev = std::max(report.worst_nonzero_dev, dev);

  const bool ok = zero_ratio < log_eps1_ && dev < eps2_;
  if (ok || report.first_violation) {
    if (!ok) report.passed = false;
    return ok;
  }

  // Locate the lexicographically first failing (j1, j2) in this row.
  p = 0;
  for (int j1 = 0; j1 < ncols; ++j1) {
    const bool j1_nonzero = p < nnz && nz[p].col == j1;
    if (!j1_nonzero) {
      for (std::size_t b = 0; b < nnz; ++b) {
        if (!(z[j1] - z[nz[b].col] < log_eps1_)) {
          record(report, {i, j1, nz[b].col, ViolationKind::kZeroRatio});
          return false;
        }
      }
      continue;
    }
    const std::size_t a = p++;
    for (std::size_t b = 0; b < nnz; ++b) {
      if (b == a) continue;
      const double d = std::abs(z[nz[a].col] - z[nz[b].col] - (logs[a] - logs[b]));
      if (!(d < eps2_)) {
        record(report, {i, j1, nz[b].col, ViolationKind::kNonzeroRatio});
        return false;
      }
    }
  }
  report.passed = false;  // unreachable for finite z
  return false;
}

ApproxReport check_conditions(const Matrix& Z, const SparseStochasticMatrix& A,
                              double eps1, double eps2, bool causal) {
  const int L = A.size();
  if (Z.rows() != L || Z.cols() != L)
    throw Error("check_conditions: Z and A dimensions differ");
  ConditionChecker checker(A, eps1, eps2, causal);
  ApproxReport report;
  for (int i = 0; i < L; ++i) checker.add_row(i, Z.row(i).data(), report);
  return report;
}

ApproxReport check_direct(const AttentionMatrix& M,
                          const SparseStochasticMatrix& A, double eps1,
                          double eps2, bool causal) {
  const int L = A.size();
  if (M.M.rows() != L || M.M.cols() != L)
    throw Error("check_direct: M and A dimensions differ");
  const double lo_scale = std::exp(-eps2);
  const double hi_scale = std::exp(eps2);
  const Matrix dense = A.to_dense();

  ApproxReport report;
  double worst_zero_ratio = 0.0;
  bool any_zero_triple = false;
  for (int i = 0; i < L; ++i) {
    const int ncols = causal ? i + 1 : L;
    const auto nz = active_entries(A, i, ncols);
    for (int j1 = 0; j1 < ncols; ++j1) {
      const bool j1_nonzero = dense(i, j1) != 0.0;
      for (const Entry& e2 : nz) {
        const int j2 = e2.col;
        if (j1_nonzero && j2 == j1) continue;
        ++report.n_triples_checked;
        const double ratio = M.M(i, j1) / M.M(i, j2);
        if (!std::isfinite(ratio)) {
          record(report, {i, j1, j2, ViolationKind::kNonFinite});
          continue;
        }
        if (!j1_nonzero) {
          any_zero_triple = true;
          worst_zero_ratio = std::max(worst_zero_ratio, ratio);
          if (!(ratio < eps1)) record(report, {i, j1, j2, ViolationKind::kZeroRatio});
        } else {
          const double target = dense(i, j1) / e2.value;
          report.worst_nonzero_dev =
              std::max(report.worst_nonzero_dev,
                       std::abs(std::log(ratio) - std::log(target)));
          if (!(target * lo_scale < ratio && ratio < target * hi_scale))
            record(report, {i, j1, j2, ViolationKind::kNonzeroRatio});
        }
      }
    }
  }
  if (any_zero_triple) report.worst_zero_ratio_log = std::log(worst_zero_ratio);
  return report;
}

nlohmann::json to_json(const ApproxReport& report) {
  nlohmann::json j;
  j["passed"] = report.passed;
  if (std::isfinite(report.worst_zero_ratio_log))
    j["worst_zero_ratio_log"] = report.worst_zero_ratio_log;
  else
    j["worst_zero_ratio_log"] = nullptr;
  j["worst_nonzero_dev"] = report.worst_nonzero_dev;
  j["n_triples_checked"] = report.n_triples_checked;
  if (report.first_violation) {
    const auto& v = *report.first_violation;
    j["first_violation"] = {{"i", v.i},
                            {"j1", v.j1},
                            {"j2", v.j2},
                            {"kind", std::string(to_string(v.kind))}};
  } else {
    j["first_violation"] = nullptr;
  }
  return j;
}

}  // namespace sparseattn
