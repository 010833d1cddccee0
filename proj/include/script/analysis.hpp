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

#ifndef SCRIPT_ANALYSIS_HPP_
#define SCRIPT_ANALYSIS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <vector>

#include "script/common.hpp"
#include "script/rng.hpp"
#include "script/similarity.hpp"

namespace script {

/// Token i sits at (i / width, i % width).
struct GridShape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return height * width; }
};

inline void check_grid(const Matrix& h_v, const GridShape& grid) {
  require(grid.height >= 1 && grid.width >= 1 && grid.size() == h_v.rows(),
          Errc::kDimensionMismatch,
          "grid " + std::to_string(grid.height) + "x" +
              std::to_string(grid.width) + " does not cover " +
              std::to_string(h_v.rows()) + " tokens");
}

inline constexpr std::size_t kEntropyBins = 20;
inline constexpr double kEntropyEpsilon = 1e-8;
inline constexpr int kPowerIterations = 100;
inline constexpr double kPowerTolerance = 1e-10;
inline constexpr std::uint64_t kPowerSeed = 0x5eed;

namespace detail {

/// Leading principal direction of the rows of `x` (already centred), by
/// power iteration on x^T x from a fixed pseudo-random start.
inline std::vector<double> first_principal_component(const Matrix& x) {
  const std::size_t d = x.cols();
  SplitMix64 rng(kPowerSeed);
  std::vector<double> v(d), w(d), proj(x.rows());
  for (double& e : v) e = rng.normal();
  double nv = norm(v);
  for (double& e : v) e /= nv;
  for (int it = 0; it < kPowerIterations; ++it) {
    for (std::size_t r = 0; r < x.rows(); ++r) proj[r] = dot(x.row(r), v);
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto row = x.row(r);
      for (std::size_t c = 0; c < d; ++c) w[c] += proj[r] * row[c];
    }
    const double nw = norm(w);
    if (nw == 0.0) break;  // zero covariance: any direction will do
    double delta = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      w[c] /= nw;
      delta += (w[c] - v[c]) * (w[c] - v[c]);
    }
    v.swap(w);
    if (std::sqrt(delta) < kPowerTolerance) break;
  }
  return v;
}

}  // namespace detail

/// Entropy of a sample after binning into kEntropyBins equal-width bins over
/// [min, max]: -sum_b p_b log(p_b + eps). A zero-width range puts everything
/// in bin 0.
inline double binned_entropy(std::span<const double> values) {
  require(!values.empty(), Errc::kInvalidArgument,
          "entropy of an empty sample");
  std::array<std::size_t, kEntropyBins> counts{};
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  for (double v : values) {
    std::size_t b = 0;
    if (hi > lo) {
      const double pos = (v - lo) / (hi - lo) * static_cast<double>(kEntropyBins);
      b = std::min(static_cast<std::size_t>(pos), kEntropyBins - 1);
    }
    ++counts[b];
  }
  double h = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(values.size());
    h -= p * std::log(p + kEntropyEpsilon);
  }
  return h;
}

/// Per-token local entropy over the 3x3 Moore neighbourhood (truncated at
/// the border): centre the neighbours, project on their first principal
/// component, then take binned_entropy of the projections.
inline std::vector<double> local_entropy_map(const Matrix& h_v,
                                             const GridShape& grid) {
  check_grid(h_v, grid);
  const std::size_t d = h_v.cols();
  std::vector<double> out(h_v.rows());
  std::vector<std::size_t> hood;
  for (std::size_t y = 0; y < grid.height; ++y) {
    for (std::size_t x = 0; x < grid.width; ++x) {
      hood.clear();
      for (std::size_t ny = y ? y - 1 : 0; ny <= std::min(y + 1, grid.height - 1); ++ny)
        for (std::size_t nx = x ? x - 1 : 0; nx <= std::min(x + 1, grid.width - 1); ++nx)
          hood.push_back(ny * grid.width + nx);

      Matrix centred = h_v.gather_rows(hood);
      std::vector<double> mean(d, 0.0);
      for (std::size_t r = 0; r < centred.rows(); ++r)
        for (std::size_t c = 0; c < d; ++c) mean[c] += centred(r, c);
      for (double& m : mean) m /= static_cast<double>(centred.rows());
      for (std::size_t r = 0; r < centred.rows(); ++r)
        for (std::size_t c = 0; c < d; ++c) centred(r, c) -= mean[c];

      const auto pc = detail::first_principal_component(centred);
      std::vector<double> proj(centred.rows());
      for (std::size_t r = 0; r < centred.rows(); ++r)
        proj[r] = dot(centred.row(r), pc);
      out[y * grid.width + x] = binned_entropy(proj);
    }
  }
  return out;
}

/// Mean cosine similarity between each token and its Moore neighbours.
inline std::vector<double> local_similarity_map(const Matrix& h_v,
                                                const GridShape& grid) {
  check_grid(h_v, grid);
  const Matrix unit = l2_normalize_rows(h_v);
  std::vector<double> out(h_v.rows(), 0.0);
  for (std::size_t y = 0; y < grid.height; ++y) {
    for (std::size_t x = 0; x < grid.width; ++x) {
      const std::size_t i = y * grid.width + x;
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t ny = y ? y - 1 : 0; ny <= std::min(y + 1, grid.height - 1); ++ny) {
        for (std::size_t nx = x ? x - 1 : 0; nx <= std::min(x + 1, grid.width - 1); ++nx) {
          const std::size_t j = ny * grid.width + nx;
          if (j == i) continue;
          sum += dot(unit.row(i), unit.row(j));
          ++count;
        }
      }
      out[i] = count ? sum / static_cast<double>(count) : 0.0;
    }
  }
  return out;
}

struct DistanceBucket {
  std::size_t distance = 0;
  std::size_t pairs = 0;
  // NaN when no pair lies at this distance.
  double mean_similarity = std::numeric_limits<double>::quiet_NaN();
};

/// Mean cosine similarity of all token pairs grouped by Manhattan distance
/// on the grid, for distances 1..max_dist.
inline std::vector<DistanceBucket> similarity_by_distance_profile(
    const Matrix& h_v, const GridShape& grid, std::size_t max_dist) {
  check_grid(h_v, grid);
  require(max_dist >= 1, Errc::kInvalidArgument, "max_dist must be >= 1");
  const Matrix sim = cosine_similarity_matrix(h_v, h_v);
  std::vector<double> sums(max_dist + 1, 0.0);
  std::vector<std::size_t> counts(max_dist + 1, 0);
  const std::size_t n = h_v.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const auto yi = static_cast<long>(i / grid.width), xi = static_cast<long>(i % grid.width);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto yj = static_cast<long>(j / grid.width), xj = static_cast<long>(j % grid.width);
      const auto dist = static_cast<std::size_t>(std::labs(yi - yj) + std::labs(xi - xj));
      if (dist > max_dist) continue;
      sums[dist] += sim(i, j);
      ++counts[dist];
    }
  }
  std::vector<DistanceBucket> out;
  for (std::size_t dist = 1; dist <= max_dist; ++dist) {
    DistanceBucket b;
    b.distance = dist;
    b.pairs = counts[dist];
    if (counts[dist]) b.mean_similarity = sums[dist] / static_cast<double>(counts[dist]);
    out.push_back(b);
  }
  return out;
}

struct ModelProfile {
  std::size_t layers = 32;
  std::size_t hidden_dim = 4096;
  std::size_t ffn_dim = 11008;
};

/// Prefill FLOPs for n tokens:
/// layers * (4 n d^2 + 2 n^2 d + 2 n d m), d = hidden, m = FFN width.
inline double flops_estimate(std::size_t n_tokens, const ModelProfile& p) {
  require(p.layers > 0 && p.hidden_dim > 0 && p.ffn_dim > 0,
          Errc::kInvalidArgument, "model profile entries must be positive");
  const double n = static_cast<double>(n_tokens);
  const double d = static_cast<double>(p.hidden_dim);
  const double m = static_cast<double>(p.ffn_dim);
  return static_cast<double>(p.layers) *
         (4.0 * n * d * d + 2.0 * n * n * d + 2.0 * n * d * m);
}

}  // namespace script

#endif  // SCRIPT_ANALYSIS_HPP_
