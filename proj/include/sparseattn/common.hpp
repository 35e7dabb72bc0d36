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

#ifndef SPARSEATTN_COMMON_HPP_
#define SPARSEATTN_COMMON_HPP_

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sparseattn {

// Dense storage is row-major double throughout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mixes a sequence of integers into one 64-bit seed (splitmix64 finalizer
/// chained over the inputs). Used to derive independent per-draw seeds.
std::uint64_t hash64(std::initializer_list<std::uint64_t> parts);

/// Formats a double with 17 significant digits in scientific notation. This
/// is the on-disk float format for every text file the library writes.
std::string format_double(double value);

}  // namespace sparseattn

#endif  // SPARSEATTN_COMMON_HPP_
