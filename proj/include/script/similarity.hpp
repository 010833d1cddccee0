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

#ifndef SCRIPT_SIMILARITY_HPP_
#define SCRIPT_SIMILARITY_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "script/common.hpp"

namespace script {

/// Lower bound applied to min-max normalized relevance so no token ends up
/// with an all-zero kernel row.
inline constexpr double kRelevanceFloor = 1e-6;

inline double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

/// Scales each nonzero row to unit Euclidean norm. Zero rows stay zero.
inline Matrix l2_normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double nr = norm(row);
    if (nr > 0.0)
      for (double& v : row) v /= nr;
  }
  return out;
}

/// Entry (i, j) is cos(a_i, b_j), or 0 when either row is zero.
///
/// Computed as the inner product of the L2-normalized rows, clamped to
/// [-1, 1] against rounding.
inline Matrix cosine_similarity_matrix(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), Errc::kDimensionMismatch,
          "cosine_similarity_matrix: dimension mismatch (" +
              std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) +
              ")");
  Matrix s = cross_dots(l2_normalize_rows(a), l2_normalize_rows(b));
  for (double& v : s.data()) v = std::clamp(v, -1.0, 1.0);
  return s;
}

inline std::vector<double> mean_pool(const Matrix& q) {
  require(q.rows() >= 1, Errc::kInvalidArgument, "mean_pool: empty matrix");
  std::vector<double> mu(q.cols(), 0.0);
  for (std::size_t r = 0; r < q.rows(); ++r) {
    auto row = q.row(r);
    for (std::size_t c = 0; c < q.cols(); ++c) mu[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(q.rows());
  for (double& v : mu) v *= inv;
  return mu;
}

/// raw[i] = cos(h_v.row(i), h_mu); 0 when either vector is zero.
inline std::vector<double> relevance_scores(const Matrix& h_v,
                                            std::span<const double> h_mu) {
  require(h_v.cols() == h_mu.size(), Errc::kDimensionMismatch,
          "relevance_scores: dimension mismatch (" + std::to_string(h_v.cols()) +
              " vs " + std::to_string(h_mu.size()) + ")");
  Matrix query(1, h_mu.size(), std::vector<double>(h_mu.begin(), h_mu.end()));
  const Matrix s = cosine_similarity_matrix(h_v, query);
  return {s.data().begin(), s.data().end()};
}

/// (v - min) / (max - min), floored at kRelevanceFloor. A constant input maps
/// to all ones.
inline std::vector<double> min_max_normalize(std::span<const double> v) {
  require(!v.empty(), Errc::kInvalidArgument, "min_max_normalize: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(v.size(), 1.0);
  if (hi > lo) {
    const double range = hi - lo;
    for (std::size_t i = 0; i < v.size(); ++i)
      out[i] = std::max((v[i] - lo) / range, kRelevanceFloor);
  }
  return out;
}

/// Raw cosine relevance to the mean query plus its normalized form.
struct RelevanceVector {
  std::vector<double> raw;
  std::vector<double> normalized;
};

inline RelevanceVector query_relevance(const Matrix& h_v, const Matrix& h_q) {
  RelevanceVector r;
  r.raw = relevance_scores(h_v, mean_pool(h_q));
  r.normalized = min_max_normalize(r.raw);
  return r;
}

}  // namespace script

#endif  // SCRIPT_SIMILARITY_HPP_
