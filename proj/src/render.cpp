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

#include "sparseattn/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace sparseattn {

GrayImage render(const Matrix& m, const RenderSpec& spec) {
  if (m.rows() != m.cols()) throw Error("render expects a square matrix");
  const int L = static_cast<int>(m.rows());
  if (spec.pool < 1 || L % spec.pool != 0)
    throw Error("pool " + std::to_string(spec.pool) + " does not divide L = " +
                std::to_string(L));
  if (!(spec.clip > 0.0 && spec.clip <= 1.0)) throw Error("clip must lie in (0, 1]");

  GrayImage img;
  img.width = img.height = L / spec.pool;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int u = 0; u < img.height; ++u) {
    for (int v = 0; v < img.width; ++v) {
      const double block_max =
          m.block(u * spec.pool, v * spec.pool, spec.pool, spec.pool).maxCoeff();
      const double level = std::clamp(block_max, 0.0, spec.clip) / spec.clip;
      img.pixels[static_cast<std::size_t>(u) * img.width + v] =
          static_cast<std::uint8_t>(std::lround(255.0 * level));
    }
  }
  return img;
}

GrayImage render(const SparseStochasticMatrix& a, const RenderSpec& spec) {
  return render(a.to_dense(), spec);
}

std::string format_pgm(const GrayImage& img) {
  std::string out = "P2\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  for (int u = 0; u < img.height; ++u) {
    for (int v = 0; v < img.width; ++v) {
      if (v) out += ' ';
      out += std::to_string(img.at(u, v));
    }
    out += '\n';
  }
  return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << format_pgm(img);
}

std::vector<int> row_argmax(const GrayImage& img) {
  std::vector<int> out(static_cast<std::size_t>(img.height), 0);
  for (int u = 0; u < img.height; ++u) {
    int best = 0;
    for (int v = 1; v < img.width; ++v)
      if (img.at(u, v) > img.at(u, best)) best = v;
    out[static_cast<std::size_t>(u)] = best;
  }
  return out;
}

double argmax_agreement(const GrayImage& reference, const GrayImage& candidate) {
  if (reference.width != candidate.width || reference.height != candidate.height)
    throw Error("argmax_agreement: image sizes differ");
  if (reference.height == 0) return 1.0;
  const auto ref_best = row_argmax(reference);
  const auto cand_best = row_argmax(candidate);
  int agree = 0;
  for (int u = 0; u < reference.height; ++u) {
    const auto top = reference.at(u, ref_best[static_cast<std::size_t>(u)]);
    agree += reference.at(u, cand_best[static_cast<std::size_t>(u)]) == top;
  }
  return static_cast<double>(agree) / reference.height;
}

}  // namespace sparseattn
