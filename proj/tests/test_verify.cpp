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


#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sparseattn/attention.hpp"
#include "sparseattn/construct.hpp"
#include "sparseattn/verify.hpp"

using namespace sparseattn;

namespace {

// B plus uniform noise in [-amp, amp].
Matrix noisy_logits(const SparseStochasticMatrix& A, double eps1, double eps2,
                    double amp, std::uint64_t seed) {
  const auto lg = build_log_gap(A, eps1, eps2);
  return lg.B + oracle::random_matrix(A.size(), A.size(), -amp, amp, seed);
}

void check_same(const ApproxReport& r, const oracle::NaiveReport& n) {
  CHECK(r.passed == n.passed);
  CHECK(r.n_triples_checked == n.triples);
  CHECK(r.worst_nonzero_dev == doctest::Approx(n.worst_dev).epsilon(1e-12));
  if (std::isfinite(n.worst_zero))
    CHECK(r.worst_zero_ratio_log == doctest::Approx(n.worst_zero).epsilon(1e-12));
  else
    CHECK(std::isinf(r.worst_zero_ratio_log));
  REQUIRE(r.first_violation.has_value() == n.first.has_value());
  if (n.first) CHECK(*r.first_violation == *n.first);
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("Z = B passes with the expected margins") {
  for (bool causal : {false, true}) {
    const auto A = generate({48, 3, 3.0, 0.15, 1.0, causal}, 2);
    const auto lg = build_log_gap(A, 0.15, 1.0);
    const auto r = check_conditions(lg.B, A, 0.15, 1.0, causal);
    CHECK(r.passed);
    CHECK(r.worst_zero_ratio_log <= std::log(0.15) - 1.0 + 1e-12);
    CHECK(r.worst_nonzero_dev < 1e-12);
    CHECK_FALSE(r.first_violation.has_value());
  }
}

TEST_CASE("triple counts follow zeros * nnz + nnz * (nnz - 1)") {
  const SparseStochasticMatrix A(
      3, 2, 2.0, false, {{0, 0, 2.0 / 3}, {0, 1, 1.0 / 3}, {1, 2, 1.0}, {2, 1, 1.0}});
  const auto lg = build_log_gap(A, 0.15, 1.41);
  CHECK(check_conditions(lg.B, A, 0.15, 1.41, false).n_triples_checked == 1 * 2 + 2 + 2 + 2);
  // Causal rows see prefixes: row 0 has no zeros, row 1 one, row 2 two.
  const SparseStochasticMatrix C(3, 2, 1.0, true, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 1, 1.0}});
  const auto lgc = build_log_gap(C, 0.15, 1.41);
  CHECK(check_conditions(lgc.B, C, 0.15, 1.41, true).n_triples_checked == 0 + 1 + 2);
}

TEST_CASE("row shifts do not change the verdict") {
  const auto A = generate({32, 2, 2.0, 0.3, 0.8, false}, 9);
  const Matrix Z = noisy_logits(A, 0.3, 0.8, 0.5, 1);
  Matrix shifted = Z;
  for (int i = 0; i < 32; ++i) shifted.row(i).array() += 100.0 * i - 1000.0;
  const auto a = check_conditions(Z, A, 0.3, 0.8, false);
  const auto b = check_conditions(shifted, A, 0.3, 0.8, false);
  CHECK(a.passed == b.passed);
  CHECK(a.worst_nonzero_dev == doctest::Approx(b.worst_nonzero_dev).epsilon(1e-9));
}

TEST_CASE("fast checker equals the O(L^3) enumeration") {
  int fails = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const bool causal = seed % 3 == 0;
    const int L = 4 + static_cast<int>(seed % 9);
    const int k = 1 + static_cast<int>(seed % 3);
    const auto A = generate({L, std::min(k, L), 2.5, 0.2, 0.9, causal}, seed);
    const Matrix Z = noisy_logits(A, 0.2, 0.9, 0.3 + 0.02 * static_cast<double>(seed), seed);
    const auto r = check_conditions(Z, A, 0.2, 0.9, causal);
    const auto n = oracle::naive_conditions(Z, A.to_dense(), 0.2, 0.9, causal);
    check_same(r, n);
    fails += !r.passed;
  }
  // The noise ramp must exercise both verdicts.
  CHECK(fails > 10);
  CHECK(fails < 110);
}

TEST_CASE("direct ratios on softmax output match the log-domain verdict") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const bool causal = seed % 2 == 1;
    const auto A = generate({8, 2, 2.0, 0.15, 1.0, causal}, seed);
    const Matrix Z = noisy_logits(A, 0.15, 1.0, 0.05 * static_cast<double>(seed % 30), seed);
    const auto log_r = check_conditions(Z, A, 0.15, 1.0, causal);
    const auto direct = check_direct(causal ? csam(Z) : sam(Z), A, 0.15, 1.0, causal);
    CHECK(log_r.passed == direct.passed);
    CHECK(log_r.n_triples_checked == direct.n_triples_checked);
    CHECK(log_r.first_violation == direct.first_violation);
  }
}

TEST_CASE("verdict is monotone in the tolerances") {
  const auto A = generate({24, 2, 2.0, 0.15, 1.0, false}, 4);
  const Matrix Z = noisy_logits(A, 0.15, 1.0, 1.2, 4);
  const auto r = check_conditions(Z, A, 0.15, 1.0, false);
  const double need_eps1 = std::exp(r.worst_zero_ratio_log);
  const double need_eps2 = r.worst_nonzero_dev;
  for (double e1 : {0.05, 0.15, 0.5, 0.9})
    for (double e2 : {0.2, 0.6, 1.0, 1.4}) {
      const bool expected = need_eps1 < e1 && need_eps2 < e2;
      CHECK(check_conditions(Z, A, e1, e2, false).passed == expected);
    }
}

TEST_CASE("strict comparisons: equality fails") {
  const SparseStochasticMatrix A(2, 1, 1.0, false, {{0, 0, 1.0}, {1, 1, 1.0}});
  Matrix Z(2, 2);
  Z << 0.0, std::log(0.5), std::log(0.5), 0.0;
  const auto r = check_conditions(Z, A, 0.5, 0.1, false);
  CHECK_FALSE(r.passed);
  REQUIRE(r.first_violation.has_value());
  CHECK(*r.first_violation == TripleViolation{0, 1, 0, ViolationKind::kZeroRatio});
}

TEST_CASE("check_direct flags a ratio above eps1 and a bad nonzero ratio") {
  const SparseStochasticMatrix A(2, 2, 2.0, false,
                                 {{0, 0, 0.5}, {0, 1, 0.5}, {1, 1, 1.0}});
  AttentionMatrix M;
  M.M.resize(2, 2);
  M.M << 0.2, 0.8, 0.3, 0.7;
  const auto r = check_direct(M, A, 0.15, 0.5, false);
  CHECK_FALSE(r.passed);
  REQUIRE(r.first_violation.has_value());
  // Row 0: ratio 0.25 against target 1 is outside (e^-0.5, e^0.5).
  CHECK(*r.first_violation == TripleViolation{0, 0, 1, ViolationKind::kNonzeroRatio});

  M.M << 0.5, 0.5, 0.0, 1.0;
  const auto ok = check_direct(M, A, 0.15, 0.5, false);
  CHECK(ok.passed);
  CHECK(std::isinf(ok.worst_zero_ratio_log));

  M.M << 0.5, 0.5, 0.5, 0.0;
  const auto nf = check_direct(M, A, 0.15, 0.5, false);
  REQUIRE(nf.first_violation.has_value());
  CHECK(nf.first_violation->kind == ViolationKind::kNonFinite);
}

TEST_CASE("json report") {
  ApproxReport r;
  auto j = to_json(r);
  CHECK(j["passed"] == true);
  CHECK(j["worst_zero_ratio_log"].is_null());
  CHECK(j["first_violation"].is_null());
  r.passed = false;
  r.worst_zero_ratio_log = -1.5;
  r.first_violation = TripleViolation{3, 1, 2, ViolationKind::kNonzeroRatio};
  j = to_json(r);
  CHECK(j["worst_zero_ratio_log"] == -1.5);
  CHECK(j["first_violation"]["kind"] == "nonzero_ratio");
  CHECK(j["first_violation"]["i"] == 3);
  CHECK(to_string(ViolationKind::kZeroRatio) == "zero_ratio");
  CHECK(to_string(ViolationKind::kNonFinite) == "non_finite");
}

}  // TEST_SUITE
