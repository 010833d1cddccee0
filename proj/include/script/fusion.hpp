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

#ifndef SCRIPT_FUSION_HPP_
#define SCRIPT_FUSION_HPP_

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "script/common.hpp"
#include "script/gsp.hpp"
#include "script/qcsp.hpp"
#include "script/rng.hpp"
#include "script/similarity.hpp"
#include "script/tensor_io.hpp"

namespace script {

struct FusionParams {
  GspParams gsp;
  // GSP candidate pool size; 0 means min(n, 2m).
  std::size_t gsp_keep = 0;
  KernelOptions kernel;
};

inline std::size_t default_gsp_keep(std::size_t n, std::size_t m) {
  return std::min(n, 2 * m);
}

/// Intersects a candidate set with a greedy order.
///
/// Walks the order produced by `next_in_order` (returns nullopt when
/// exhausted), keeping candidate members as they appear until `m` are kept
/// or every candidate has been seen. Any shortfall is filled from the start
/// of the same order, skipping indices already kept.
template <class NextFn>
  requires std::invocable<NextFn&>
Selection fuse(const std::vector<bool>& in_candidates, std::size_t m,
               NextFn&& next_in_order) {
  const std::size_t n = in_candidates.size();
  require(m <= n, Errc::kOutOfRange,
          "fusion budget " + std::to_string(m) + " exceeds n = " +
              std::to_string(n));
  Selection s;
  s.n_original = n;
  s.budget = m;

  const auto total = static_cast<std::size_t>(
      std::count(in_candidates.begin(), in_candidates.end(), true));
  std::vector<std::size_t> order;
  std::vector<bool> taken(n, false);
  std::size_t seen = 0;
  while (s.kept.size() < m && seen < total) {
    const std::optional<std::size_t> q = next_in_order();
    if (!q) break;
    order.push_back(*q);
    if (in_candidates[*q]) {
      ++seen;
      taken[*q] = true;
      s.kept.push_back(*q);
      s.stage_tags.push_back(StageTag::kIntersection);
    }
  }
  for (std::size_t pos = 0; s.kept.size() < m; ++pos) {
    if (pos == order.size()) {
      const std::optional<std::size_t> q = next_in_order();
      if (!q) break;
      order.push_back(*q);
    }
    const std::size_t q = order[pos];
    if (taken[q]) continue;
    taken[q] = true;
    s.kept.push_back(q);
    s.stage_tags.push_back(StageTag::kQcspFill);
  }
  return s;
}

/// Fusion against a precomputed order.
inline Selection fuse(const std::vector<bool>& in_candidates, std::size_t m,
                      const std::vector<std::size_t>& order) {
  std::size_t pos = 0;
  return fuse(in_candidates, m, [&]() -> std::optional<std::size_t> {
    if (pos == order.size()) return std::nullopt;
    return order[pos++];
  });
}

/// Full pipeline: GSP candidate pool intersected with the QCSP greedy order.
/// A null query runs the diversity-only QCSP variant.
inline Selection script_select(const Matrix& h_v, const Matrix* h_q,
                               std::size_t m, const FusionParams& params = {}) {
  const std::size_t n = h_v.rows();
  require(m >= 1 && m <= n, Errc::kOutOfRange,
          "budget must lie in [1, " + std::to_string(n) + "], got " +
              std::to_string(m));
  const std::size_t pool =
      params.gsp_keep ? params.gsp_keep : default_gsp_keep(n, m);
  require(pool >= m && pool <= n, Errc::kOutOfRange,
          "gsp keep must lie in [" + std::to_string(m) + ", " +
              std::to_string(n) + "], got " + std::to_string(pool));
  if (h_q) {
    require(h_q->cols() == h_v.cols(), Errc::kDimensionMismatch,
            "query dimension " + std::to_string(h_q->cols()) +
                " does not match token dimension " +
                std::to_string(h_v.cols()));
  }

  const DppKernel kernel(h_v, qcsp_relevance(h_v, h_q), params.kernel);
  // A materialized kernel already holds every cosine the graph needs, with
  // identical bits.
  const Selection candidates = gsp_select(
      kernel.similarity_matrix().empty()
          ? build_graph(h_v, params.gsp)
          : graph_from_similarity(kernel.similarity_matrix(), params.gsp),
      pool);
  std::vector<bool> in_pool(n, false);
  for (std::size_t i : candidates.kept) in_pool[i] = true;

  GreedyMap<DppKernel> greedy(kernel);
  Selection s = fuse(in_pool, m, [&]() -> std::optional<std::size_t> {
    if (greedy.done()) return std::nullopt;
    return greedy.next();
  });
  s.mode = "script";
  s.params = {{"tau", params.gsp.tau},
              {"gamma", params.gsp.gamma},
              {"gsp_keep", static_cast<double>(pool)}};
  return s;
}

inline Selection script_select(const Matrix& h_v, const Matrix& h_q,
                               std::size_t m, const FusionParams& params = {}) {
  return script_select(h_v, &h_q, m, params);
}

namespace detail {

inline Selection tagged(std::vector<std::size_t> kept, std::size_t n,
                        StageTag tag, std::string mode) {
  Selection s;
  s.stage_tags.assign(kept.size(), tag);
  s.kept = std::move(kept);
  s.n_original = n;
  s.budget = s.kept.size();
  s.mode = std::move(mode);
  return s;
}

inline void check_budget(std::size_t n, std::size_t m) {
  require(m <= n, Errc::kOutOfRange,
          "budget " + std::to_string(m) + " exceeds n = " + std::to_string(n));
}

}  // namespace detail

/// QCSP alone (relevance-weighted DPP greedy), tagged qcsp-only.
inline Selection qcsp_only(const Matrix& h_v, const Matrix* h_q, std::size_t m,
                           const KernelOptions& options = {}) {
  detail::check_budget(h_v.rows(), m);
  std::vector<std::size_t> kept;
  if (m > 0) kept = qcsp_select(h_v, h_q, m, options);
  return detail::tagged(std::move(kept), h_v.rows(), StageTag::kQcspOnly,
                        "qcsp");
}

/// m distinct indices uniformly without replacement (partial Fisher-Yates
/// over SplitMix64), in draw order.
inline Selection baseline_random(std::size_t n, std::size_t m,
                                 std::uint64_t seed) {
  detail::check_budget(n, m);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[r]);
  }
  pool.resize(m);
  Selection s = detail::tagged(std::move(pool), n, StageTag::kBaseline, "random");
  s.params = {{"seed", static_cast<double>(seed)}};
  return s;
}

/// Top-m tokens by raw query relevance, ties to the lower index.
inline Selection baseline_topk_relevance(const Matrix& h_v, const Matrix& h_q,
                                         std::size_t m) {
  detail::check_budget(h_v.rows(), m);
  require(h_q.cols() == h_v.cols(), Errc::kDimensionMismatch,
          "query dimension does not match token dimension");
  const auto raw = relevance_scores(h_v, mean_pool(h_q));
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw[a] > raw[b];
  });
  order.resize(m);
  return detail::tagged(std::move(order), h_v.rows(), StageTag::kBaseline,
                        "topk");
}

/// Greedy MAP on the unweighted similarity kernel.
inline Selection baseline_diversity_only(const Matrix& h_v, std::size_t m,
                                         const KernelOptions& options = {}) {
  Selection s = qcsp_only(h_v, nullptr, m, options);
  for (auto& t : s.stage_tags) t = StageTag::kBaseline;
  s.mode = "diversity";
  return s;
}

inline Selection baseline_gsp_only(const Matrix& h_v, std::size_t m,
                                   const GspParams& params = {}) {
  return gsp_select(h_v, m, params);
}

}  // namespace script

#endif  // SCRIPT_FUSION_HPP_
