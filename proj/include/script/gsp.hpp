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

#ifndef SCRIPT_GSP_HPP_
#define SCRIPT_GSP_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "script/common.hpp"
#include "script/similarity.hpp"
#include "script/tensor_io.hpp"

namespace script {

/// Graph-structured pruning parameters.
struct GspParams {
  double tau = 0.3;
  double gamma = 5.0;
};

inline void validate(const GspParams& p) {
  require(p.tau > -1.0 && p.tau < 1.0, Errc::kInvalidArgument,
          "tau must lie in (-1, 1), got " + std::to_string(p.tau));
  require(p.gamma > 0.0 && std::isfinite(p.gamma), Errc::kInvalidArgument,
          "gamma must be positive, got " + std::to_string(p.gamma));
}

struct BipartiteSplit {
  std::vector<std::size_t> src;  // even token indices
  std::vector<std::size_t> dst;  // odd token indices
};

inline BipartiteSplit bipartite_split(std::size_t n) {
  require(n >= 1, Errc::kInvalidArgument, "bipartite_split: n must be >= 1");
  BipartiteSplit s;
  s.src.reserve((n + 1) / 2);
  s.dst.reserve(n / 2);
  for (std::size_t i = 0; i < n; ++i) (i % 2 ? s.dst : s.src).push_back(i);
  return s;
}

/// Complete bipartite graph between even- and odd-indexed tokens, weighted
/// by cosine similarity. cross_sim(a, b) compares src[a] with dst[b].
struct BipartiteRedundancyGraph {
  BipartiteSplit split;
  Matrix cross_sim;
  GspParams params;
  std::size_t n = 0;
  // Number of pairwise similarities actually computed.
  std::size_t similarity_evaluations = 0;
};

inline BipartiteRedundancyGraph build_graph(const Matrix& h_v,
                                            const GspParams& params = {}) {
  validate(params);
  require(h_v.rows() >= 1, Errc::kInvalidArgument,
          "build_graph: need at least one token");
  BipartiteRedundancyGraph g;
  g.n = h_v.rows();
  g.params = params;
  g.split = bipartite_split(g.n);
  g.cross_sim = cosine_similarity_matrix(h_v.gather_rows(g.split.src),
                                         h_v.gather_rows(g.split.dst));
  g.similarity_evaluations = g.cross_sim.rows() * g.cross_sim.cols();
  return g;
}

/// Same graph read off a precomputed n x n cosine similarity matrix.
inline BipartiteRedundancyGraph graph_from_similarity(const Matrix& sim,
                                                      const GspParams& params = {}) {
  validate(params);
  require(sim.rows() >= 1 && sim.rows() == sim.cols(), Errc::kDimensionMismatch,
          "graph_from_similarity: need a non-empty square matrix");
  BipartiteRedundancyGraph g;
  g.n = sim.rows();
  g.params = params;
  g.split = bipartite_split(g.n);
  g.cross_sim = Matrix(g.split.src.size(), g.split.dst.size());
  for (std::size_t a = 0; a < g.split.src.size(); ++a)
    for (std::size_t b = 0; b < g.split.dst.size(); ++b)
      g.cross_sim(a, b) = sim(g.split.src[a], g.split.dst[b]);
  g.similarity_evaluations = g.cross_sim.rows() * g.cross_sim.cols();
  return g;
}

struct RedundancyScores {
  std::vector<double> score;
  std::vector<std::size_t> degree;
  // Mean similarity over thresholded neighbours, or over the whole opposite
  // side when the token is isolated (used_fallback).
  std::vector<double> mean_sim;
  std::vector<bool> used_fallback;
};

/// Redundancy per token:
///   degree > 0:  degree * exp(gamma * (mean_sim - tau))
///   otherwise:   mean similarity to every token on the opposite side
/// Edges count when similarity >= tau. A token whose opposite side is empty
/// (n == 1) scores 0.
inline RedundancyScores redundancy_scores(const BipartiteRedundancyGraph& g) {
  const auto& [tau, gamma] = g.params;
  RedundancyScores out;
  out.score.assign(g.n, 0.0);
  out.degree.assign(g.n, 0);
  out.mean_sim.assign(g.n, 0.0);
  out.used_fallback.assign(g.n, false);

  const std::size_t ns = g.split.src.size(), nd = g.split.dst.size();
  auto finish = [&](std::size_t token, std::size_t deg, double above_sum,
                    double all_sum, std::size_t opposite) {
    out.degree[token] = deg;
    if (deg > 0) {
      const double mu = above_sum / static_cast<double>(deg);
      out.mean_sim[token] = mu;
      out.score[token] = static_cast<double>(deg) * std::exp(gamma * (mu - tau));
    } else {
      const double mu_all =
          opposite ? all_sum / static_cast<double>(opposite) : 0.0;
      out.mean_sim[token] = mu_all;
      out.used_fallback[token] = true;
      out.score[token] = mu_all;
    }
  };

  for (std::size_t a = 0; a < ns; ++a) {
    std::size_t deg = 0;
    double above = 0.0, all = 0.0;
    for (std::size_t b = 0; b < nd; ++b) {
      const double s = g.cross_sim(a, b);
      all += s;
      if (s >= tau) {
        ++deg;
        above += s;
      }
    }
    finish(g.split.src[a], deg, above, all, nd);
  }
  for (std::size_t b = 0; b < nd; ++b) {
    std::size_t deg = 0;
    double above = 0.0, all = 0.0;
    for (std::size_t a = 0; a < ns; ++a) {
      const double s = g.cross_sim(a, b);
      all += s;
      if (s >= tau) {
        ++deg;
        above += s;
      }
    }
    finish(g.split.dst[b], deg, above, all, ns);
  }
  return out;
}

/// Indices of the `keep` lowest scores, ties to the lower index, returned in
/// ascending index order.
inline std::vector<std::size_t> lowest_scores(const std::vector<double>& score,
                                              std::size_t keep) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return score[x] < score[y];
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

/// Token count retained for pruning ratio p: round((1 - p) * n), half up.
inline std::size_t keep_count_for_ratio(std::size_t n, double ratio) {
  require(ratio >= 0.0 && ratio <= 1.0, Errc::kInvalidArgument,
          "pruning ratio must lie in [0, 1], got " + std::to_string(ratio));
  return static_cast<std::size_t>(
      std::floor((1.0 - ratio) * static_cast<double>(n) + 0.5));
}

inline void check_keep(std::size_t n, std::size_t keep) {
  require(keep >= 1 && keep <= n, Errc::kOutOfRange,
          "gsp keep must lie in [1, " + std::to_string(n) + "], got " +
              std::to_string(keep));
}

/// Drops the n - keep most redundant tokens of an already built graph.
inline Selection gsp_select(const BipartiteRedundancyGraph& graph,
                            std::size_t keep) {
  const std::size_t n = graph.n;
  const GspParams& params = graph.params;
  check_keep(n, keep);
  const auto scores = redundancy_scores(graph);
  Selection s;
  s.kept = lowest_scores(scores.score, keep);
  s.stage_tags.assign(keep, StageTag::kGspOnly);
  s.n_original = n;
  s.budget = keep;
  s.mode = "gsp";
  s.params = {{"tau", params.tau}, {"gamma", params.gamma}};
  return s;
}

/// Drops the n - keep most redundant tokens.
inline Selection gsp_select(const Matrix& h_v, std::size_t keep,
                            const GspParams& params = {}) {
  check_keep(h_v.rows(), keep);
  return gsp_select(build_graph(h_v, params), keep);
}

}  // namespace script

#endif  // SCRIPT_GSP_HPP_
