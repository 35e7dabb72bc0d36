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

#include "sparseattn/construct.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace sparseattn {

LogGapMatrix build_log_gap(const SparseStochasticMatrix& A, double eps1,
                           double eps2) {
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw Error("eps1 must lie in (0, 1)");
  if (!(eps2 > 0.0)) throw Error("eps2 must be positive");
  const int L = A.size();
  LogGapMatrix lg;
  lg.eps1 = eps1;
  lg.eps2 = eps2;
  lg.min_nz = min_nonzero_rows(A);
  lg.B = Matrix::Zero(L, L);
  const double offset = -std::log(eps1) + eps2;
  for (int i = 0; i < L; ++i) {
    const double log_min = std::log(lg.min_nz[i]);
    for (const Entry& e : A.row(i))
      lg.B(i, e.col) = std::log(e.value) - log_min + offset;
  }
  return lg;
}

Matrix reconstruct_c(const LogGapMatrix& lg) {
  const double scale = lg.eps1 * std::exp(-lg.eps2);
  Matrix c = lg.B.array().exp().matrix();
  for (Eigen::Index i = 0; i < c.rows(); ++i) c.row(i) *= scale * lg.min_nz[i];
  return c;
}

Factorization svd_factor(const Matrix& B) {
  if (B.rows() != B.cols()) throw Error("svd_factor expects a square matrix");
  if (!B.allFinite()) throw Error("svd_factor: B has non-finite entries");
  // Two-sided Jacobi: BDCSVD in Eigen 3.4.0 loses accuracy on these
  // near-permutation matrices (clustered singular values), and Jacobi
  // converges in few sweeps because the columns are already nearly
  // orthogonal.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw Error("SVD failed to converge (L = " + std::to_string(B.rows()) +
                ", max |B| = " + format_double(B.cwiseAbs().maxCoeff()) + ")");
  }
  Factorization f;
  f.sigma = svd.singularValues();
  f.D = svd.matrixU() * f.sigma.asDiagonal();
  f.V = svd.matrixV();
  return f;
}

Factorization svd_factor(const LogGapMatrix& lg) { return svd_factor(lg.B); }

StiefelSample sample_stiefel(int L, int half_d, std::uint64_t seed) {
  if (half_d < 1 || half_d > L)
    throw Error("sample_stiefel requires 1 <= half_d <= L");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(L, half_d);
  // Fill row-major so the stream maps to Y's storage order.
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < half_d; ++j) g(i, j) = normal(rng);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  StiefelSample s;
  s.seed = seed;
  s.Y = qr.householderQ() * Eigen::MatrixXd::Identity(L, half_d);
  const auto& r = qr.matrixQR();
  for (int j = 0; j < half_d; ++j)
    if (r(j, j) < 0.0) s.Y.col(j) *= -1.0;
  return s;
}

ProjectionPair compress(const Factorization& f, const StiefelSample& y, int d) {
  const Eigen::Index L = f.D.rows();
  if (d <= 0 || d % 2 != 0) throw Error("d must be a positive even integer");
  if (y.Y.rows() != L || y.Y.cols() != d / 2)
    throw Error("compress: Y must be L x d/2");
  const double c = std::sqrt(2.0 * static_cast<double>(L) / d);
  ProjectionPair p;
  p.d = d;
  p.X1.noalias() = c * (f.D * y.Y);
  p.X2.noalias() = c * (f.V * y.Y);
  return p;
}

AttentionInputs assemble(const ProjectionPair& p, int d_hid) {
  const Eigen::Index L = p.X1.rows();
  const int d = p.d;
  const int h = d / 2;
  if (p.X1.cols() != h || p.X2.cols() != h || p.X2.rows() != L)
    throw Error("assemble: projection pair has inconsistent shape");
  if (d_hid < d) throw Error("assemble: d_hid must be >= d");
  if (d_hid > 2 * L) throw Error("assemble: d_hid must be <= 2L");

  AttentionInputs ai;
  ai.d = d;
  ai.d_hid = d_hid;
  ai.X = Matrix::Zero(L, d_hid);
  ai.X.leftCols(h) = p.X1;
  ai.X.middleCols(h, h) = p.X2;
  ai.WQ = Matrix::Zero(d_hid, d);
  ai.WQ.topLeftCorner(d, d).setIdentity();
  // WK^T = [Omega_d | 0] with Omega_d = [[0, I], [0, 0]], so WK holds
  // Omega_d^T in its top block: identity from (h, 0).
  ai.WK = Matrix::Zero(d_hid, d);
  ai.WK.block(h, 0, h, h).setIdentity();
  return ai;
}

void write_attention_inputs(const AttentionInputs& ai,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  auto block = [&](const char* name, const Matrix& m) {
    out << "# " << name << '\n' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        out << (c ? " " : "") << format_double(m(r, c));
      out << '\n';
    }
  };
  block("X", ai.X);
  block("WQ", ai.WQ);
  block("WK", ai.WK);
}

}  // namespace sparseattn
