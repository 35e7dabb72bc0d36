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

// Attention maps as grayscale PGM images: max-pool pool x pool blocks, clip
// at `clip`, scale to 0..255.

#ifndef SPARSEATTN_RENDER_HPP_
#define SPARSEATTN_RENDER_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sparseattn/common.hpp"
#include "sparseattn/matrices.hpp"

namespace sparseattn {

struct RenderSpec {
  int pool = 8;
  double clip = 0.05;
};

/// Row-major (L/pool) x (L/pool) pixels; pixel = round(255 min(block_max,
/// clip) / clip). Throws if pool does not divide L or clip is not in (0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

GrayImage render(const Matrix& m, const RenderSpec& spec);
GrayImage render(const SparseStochasticMatrix& a, const RenderSpec& spec);

/// ASCII PGM (P2), maxval 255, one image row per line.
std::string format_pgm(const GrayImage& img);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Column of the brightest pixel in each image row (ties go to the
/// leftmost).
std::vector<int> row_argmax(const GrayImage& img);

/// Fraction of image rows where the candidate's brightest column is one of
/// the reference's brightest columns. Pooling a k-sparse matrix produces
/// ties in the reference (several saturated blocks per row), so membership
/// in the maximal set is the comparison, not equality of leftmost argmaxes.
double argmax_agreement(const GrayImage& reference, const GrayImage& candidate);

}  // namespace sparseattn

#endif  // SPARSEATTN_RENDER_HPP_
