// Copyright 2026 The Script Authors.
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

#ifndef SCRIPT_SYNTH_HPP_
#define SCRIPT_SYNTH_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "script/analysis.hpp"
#include "script/common.hpp"
#include "script/oracle.hpp"
#include "script/rng.hpp"

namespace script::synth {

/// i.i.d. standard normal entries.
inline Matrix random_embeddings(std::size_t n, std::size_t d,
                                std::uint64_t seed) {
  require(n >= 1 && d >= 1, Errc::kInvalidArgument,
          "random: n and d must be positive");
  SplitMix64 rng(seed);
  Matrix m(n, d);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

/// n / block distinct random rows, each repeated `block` times in a row.
inline Matrix duplicate_blocks(std::size_t n, std::size_t d, std::size_t block,
                               std::uint64_t seed) {
  require(block >= 1 && n % block == 0, Errc::kInvalidArgument,
          "duplicate-blocks: block size " + std::to_string(block) +
              " must divide n = " + std::to_string(n));
  const Matrix base = random_embeddings(n / block, d, seed);
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = base.row(i / block);
    std::copy(src.begin(), src.end(), m.row(i).begin());
  }
  return m;
}

/// Grid whose left half (x < width / 2) holds one repeated random vector and
/// whose right half holds independent noise.
inline Matrix two_region_grid(const GridShape& grid, std::size_t d,
                              std::uint64_t seed) {
  require(grid.height >= 1 && grid.width >= 2 && d >= 1,
          Errc::kInvalidArgument,
          "two-region-grid: need height >= 1, width >= 2, d >= 1");
  SplitMix64 rng(seed);
  std::vector<double> constant(d);
  for (double& v : constant) v = rng.normal();
  Matrix m(grid.size(), d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto row = m.row(i);
    if (i % grid.width < grid.width / 2) {
      std::copy(constant.begin(), constant.end(), row.begin());
    } else {
      for (double& v : row) v = rng.normal();
    }
  }
  return m;
}

/// True when token i lies in the constant half of two_region_grid().
inline bool in_constant_region(const GridShape& grid, std::size_t i) {
  return i % grid.width < grid.width / 2;
}

/// n unit vectors in R^d with pairwise inner product rho.
///
/// Rows of the symmetric square root F = a I + b 11^T of the equicorrelation
/// matrix, where a = sqrt(1 - rho) and b = (sqrt(1 + (n-1) rho) - a) / n,
/// embedded in the first n coordinates and then rotated by seeded Householder
/// reflections.
inline Matrix equicorrelated(std::size_t n, std::size_t d, double rho,
                             std::uint64_t seed) {
  require(n >= 1, Errc::kInvalidArgument, "equicorrelated: n must be >= 1");
  require(d >= n, Errc::kInvalidArgument,
          "equicorrelated: d = " + std::to_string(d) + " must be >= n = " +
              std::to_string(n));
  require(rho >= oracle::equicorrelation_lower_limit(n) && rho <= 1.0,
          Errc::kInvalidArgument,
          "equicorrelated: rho " + std::to_string(rho) +
              " outside [-1/(n-1), 1]");
  const double nn = static_cast<double>(n);
  const double a = std::sqrt(1.0 - rho);
  const double b = (std::sqrt(std::max(0.0, 1.0 + (nn - 1.0) * rho)) - a) / nn;
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? a : 0.0) + b;

  SplitMix64 rng(seed);
  std::vector<double> h(d);
  for (int refl = 0; refl < 3; ++refl) {
    for (double& v : h) v = rng.normal();
    const double hh = dot(h, h);
    if (hh == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      auto row = m.row(i);
      const double f = 2.0 * dot(row, h) / hh;
      for (std::size_t c = 0; c < d; ++c) row[c] -= f * h[c];
    }
  }
  return m;
}

enum class Pattern { kRandom, kDuplicateBlocks, kTwoRegionGrid, kEquicorrelated };

inline Pattern pattern_from_string(std::string_view s) {
  if (s == "random") return Pattern::kRandom;
  if (s == "duplicate-blocks") return Pattern::kDuplicateBlocks;
  if (s == "two-region-grid") return Pattern::kTwoRegionGrid;
  if (s == "equicorrelated") return Pattern::kEquicorrelated;
  throw Error(Errc::kInvalidArgument, "unknown pattern '" + std::string(s) + "'");
}

}  // namespace script::synth

#endif  // SCRIPT_SYNTH_HPP_
