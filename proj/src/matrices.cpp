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

#include "sparseattn/matrices.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace sparseattn {

void ApproxParams::check() const {
  if (L <= 1) throw Error("L must be > 1, got " + std::to_string(L));
  if (k < 1 || k > L)
    throw Error("k must satisfy 1 <= k <= L, got " + std::to_string(k));
  if (!(gamma >= 1.0)) throw Error("gamma must be >= 1");
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw Error("eps1 must lie in (0, 1)");
  if (!(eps2 > 0.0 && eps2 < std::sqrt(2.0)))
    throw Error("eps2 must lie in (0, sqrt(2))");
}

SparseStochasticMatrix::SparseStochasticMatrix(int L, int k, double gamma,
                                               bool causal,
                                               std::vector<Entry> entries)
    : L_(L), k_(k), gamma_(gamma), causal_(causal),
      entries_(std::move(entries)) {
  if (L_ < 1) throw Error("matrix dimension must be positive");
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(static_cast<std::size_t>(L_) + 1, 0);
  for (std::size_t n = 0; n < entries_.size(); ++n) {
    const Entry& e = entries_[n];
    if (e.row < 0 || e.row >= L_ || e.col < 0 || e.col >= L_) {
      throw Error("entry (" + std::to_string(e.row) + ", " +
                  std::to_string(e.col) + ") out of range for L = " +
                  std::to_string(L_));
    }
    if (n > 0 && entries_[n - 1].row == e.row && entries_[n - 1].col == e.col) {
      throw Error("duplicate entry (" + std::to_string(e.row) + ", " +
                  std::to_string(e.col) + ")");
    }
    if (!(e.value > 0.0) || !std::isfinite(e.value)) {
      throw Error("entry (" + std::to_string(e.row) + ", " +
                  std::to_string(e.col) + ") must be positive and finite");
    }
    if (causal_ && e.col > e.row) {
      throw Error("entry (" + std::to_string(e.row) + ", " +
                  std::to_string(e.col) + ") lies above the diagonal of a "
                  "causal matrix");
    }
    ++row_ptr_[static_cast<std::size_t>(e.row) + 1];
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
}

std::span<const Entry> SparseStochasticMatrix::row(int i) const {
  const auto lo = row_ptr_[static_cast<std::size_t>(i)];
  const auto hi = row_ptr_[static_cast<std::size_t>(i) + 1];
  return std::span<const Entry>(entries_).subspan(lo, hi - lo);
}

Matrix SparseStochasticMatrix::to_dense() const {
  Matrix m = Matrix::Zero(L_, L_);
  for (const Entry& e : entries_) m(e.row, e.col) = e.value;
  return m;
}

SparseStochasticMatrix generate(const ApproxParams& params, std::uint64_t seed) {
  params.check();
  const int L = params.L;
  const int k = params.k;
  std::mt19937_64 rng(seed);

  std::vector<int> rows(L), cols(L);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);

  std::vector<int> row_count(L, 0), col_count(L, 0);
  std::vector<double> raw(static_cast<std::size_t>(L) * L, 0.0);
  std::bernoulli_distribution coin(0.5);

  auto visit = [&](int i, int j) {
    if (params.causal && j > i) return;
    double& slot = raw[static_cast<std::size_t>(i) * L + j];
    if (slot != 0.0 || row_count[i] >= k || col_count[j] >= k) return;
    slot = coin(rng) ? params.gamma : 1.0;
    ++row_count[i];
    ++col_count[j];
  };

  std::vector<int> pass1_rows = rows;
  if (params.causal) std::iota(pass1_rows.begin(), pass1_rows.end(), 0);
  for (int i : pass1_rows)
    for (int j : cols) visit(i, j);
  for (int j : cols)
    for (int i : rows) visit(i, j);

  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(k) * L);
  for (int i = 0; i < L; ++i) {
    if (row_count[i] == 0)
      throw Error("generated row " + std::to_string(i) + " has no nonzeros");
    const double* r = &raw[static_cast<std::size_t>(i) * L];
    double sum = 0.0;
    for (int j = 0; j < L; ++j) sum += r[j];
    for (int j = 0; j < L; ++j)
      if (r[j] != 0.0) entries.push_back({i, j, r[j] / sum});
  }
  return SparseStochasticMatrix(L, k, params.gamma, params.causal,
                                std::move(entries));
}

ValidationReport validate(const SparseStochasticMatrix& A,
                          const ApproxParams& params) {
  ValidationReport report;
  auto fail = [&](std::string invariant, int row, int col, std::string detail) {
    report.passed = false;
    report.violations.push_back(
        {std::move(invariant), row, col, std::move(detail)});
  };

  const int L = A.size();
  if (L != params.L) {
    fail("dimension", -1, -1,
         "matrix has L = " + std::to_string(L) + ", params say " +
             std::to_string(params.L));
  }
  // Ratios of normalized values carry rounding of a few ulps.
  const double gamma_hi = params.gamma * (1.0 + 1e-12);

  std::vector<int> col_count(L, 0);
  for (int i = 0; i < L; ++i) {
    const auto row = A.row(i);
    if (row.empty()) {
      fail("nonempty_row", i, -1, "row has no nonzeros");
      continue;
    }
    double sum = 0.0, lo = row.front().value, hi = row.front().value;
    int lo_col = row.front().col, hi_col = row.front().col;
    for (const Entry& e : row) {
      sum += e.value;
      ++col_count[e.col];
      if (e.value < lo) { lo = e.value; lo_col = e.col; }
      if (e.value > hi) { hi = e.value; hi_col = e.col; }
      if (params.causal && e.col > e.row)
        fail("causal", e.row, e.col, "entry above the diagonal");
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      fail("stochastic", i, -1, "row sum " + format_double(sum));
    if (static_cast<int>(row.size()) > params.k)
      fail("row_nnz", i, -1, std::to_string(row.size()) + " nonzeros");
    if (hi / lo > gamma_hi) {
      fail("variation", i, hi_col,
           "ratio " + format_double(hi / lo) + " to column " +
               std::to_string(lo_col) + " exceeds gamma");
    }
  }
  for (int j = 0; j < L; ++j) {
    if (col_count[j] > params.k)
      fail("col_nnz", -1, j, std::to_string(col_count[j]) + " nonzeros");
  }
  return report;
}

Vector min_nonzero_rows(const SparseStochasticMatrix& A) {
  Vector out(A.size());
  for (int i = 0; i < A.size(); ++i) {
    const auto row = A.row(i);
    if (row.empty()) throw Error("row " + std::to_string(i) + " is all zero");
    double m = row.front().value;
    for (const Entry& e : row) m = std::min(m, e.value);
    out[i] = m;
  }
  return out;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, std::size_t line_no) {
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error("line " + std::to_string(line_no) + ": cannot parse '" +
                std::string(token) + "'");
  }
  return value;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

SparseStochasticMatrix parse_coo(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  int L = 0, k = 0;
  double gamma = 1.0;
  bool causal = false;
  std::vector<Entry> entries;

  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (!have_header) {
      if (tok.size() != 4)
        throw Error("malformed header: expected 'L k gamma causal'");
      L = parse_number<int>(tok[0], line_no);
      k = parse_number<int>(tok[1], line_no);
      gamma = parse_number<double>(tok[2], line_no);
      const int c = parse_number<int>(tok[3], line_no);
      if (L < 1 || k < 1 || !(gamma >= 1.0) || (c != 0 && c != 1))
        throw Error("malformed header: out-of-range field");
      causal = c == 1;
      have_header = true;
      continue;
    }
    if (tok.size() != 3)
      throw Error("line " + std::to_string(line_no) + ": expected 'i j value'");
    entries.push_back({parse_number<int>(tok[0], line_no),
                       parse_number<int>(tok[1], line_no),
                       parse_number<double>(tok[2], line_no)});
  }
  if (!have_header) throw Error("malformed header: empty file");
  return SparseStochasticMatrix(L, k, gamma, causal, std::move(entries));
}

SparseStochasticMatrix read_coo(const std::filesystem::path& path) {
  return parse_coo(slurp(path));
}

std::string format_coo(const SparseStochasticMatrix& A) {
  std::string out = std::to_string(A.size()) + " " + std::to_string(A.k()) +
                    " " + format_double(A.gamma()) + " " +
                    (A.causal() ? "1" : "0") + "\n";
  for (const Entry& e : A.entries()) {
    out += std::to_string(e.row);
    out += ' ';
    out += std::to_string(e.col);
    out += ' ';
    out += format_double(e.value);
    out += '\n';
  }
  return out;
}

void write_coo(const SparseStochasticMatrix& A,
               const std::filesystem::path& path) {
  dump(format_coo(A), path);
}

Matrix read_dense(const std::filesystem::path& path) {
  std::istringstream in(slurp(path));
  std::string line;
  std::size_t line_no = 0;
  Matrix m;
  Eigen::Index r = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (r < 0) {
      if (tok.size() != 2) throw Error("malformed dense header: expected 'rows cols'");
      const int rows = parse_number<int>(tok[0], line_no);
      const int cols = parse_number<int>(tok[1], line_no);
      if (rows < 0 || cols < 0) throw Error("malformed dense header");
      m.resize(rows, cols);
      r = 0;
      continue;
    }
    if (r >= m.rows()) throw Error("dense matrix has too many rows");
    if (static_cast<Eigen::Index>(tok.size()) != m.cols())
      throw Error("line " + std::to_string(line_no) + ": wrong column count");
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = parse_number<double>(tok[static_cast<std::size_t>(c)], line_no);
    ++r;
  }
  if (r < 0) throw Error("malformed dense header: empty file");
  if (r != m.rows()) throw Error("dense matrix has too few rows");
  return m;
}

void write_dense(const Matrix& m, const std::filesystem::path& path) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ' ';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  dump(out, path);
}

}  // namespace sparseattn
