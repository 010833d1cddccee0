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

// Randomized property suite over the selection algorithms and the
// determinant facts they rely on. Every property reports the smallest slack
// seen ("worst margin"): allowed error minus observed error, so a property
// passes exactly when its worst margin is nonnegative.

#ifndef SCRIPT_VERIFY_HPP_
#define SCRIPT_VERIFY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "script/common.hpp"
#include "script/fusion.hpp"
#include "script/gsp.hpp"
#include "script/oracle.hpp"
#include "script/qcsp.hpp"
#include "script/rng.hpp"
#include "script/similarity.hpp"
#include "script/synth.hpp"

namespace script::verify {

struct PropertyResult {
  std::string name;
  std::size_t instances = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  // Statistics are reported but never fail the run.
  bool asserted = true;
  double statistic = 0.0;

  bool passed() const { return !asserted || worst_margin >= 0.0; }
  void observe(double margin) {
    ++instances;
    worst_margin = std::min(worst_margin, margin);
  }
};

struct Report {
  std::uint64_t seed = 0;
  std::size_t instances = 0;
  std::vector<PropertyResult> properties;

  bool all_passed() const {
    return std::all_of(properties.begin(), properties.end(),
                       [](const PropertyResult& p) { return p.passed(); });
  }

  const PropertyResult* find(const std::string& name) const {
    for (const auto& p : properties)
      if (p.name == name) return &p;
    return nullptr;
  }

  std::string to_text() const {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "seed=%llu instances=%zu\n",
                  static_cast<unsigned long long>(seed), instances);
    out += line;
    for (const auto& p : properties) {
      if (p.asserted) {
        std::snprintf(line, sizeof line,
                      "property=%s status=%s instances=%zu worst_margin=%.6e\n",
                      p.name.c_str(), p.passed() ? "PASS" : "FAIL", p.instances,
                      p.worst_margin);
      } else {
        std::snprintf(line, sizeof line,
                      "property=%s status=INFO instances=%zu value=%.6f\n",
                      p.name.c_str(), p.instances, p.statistic);
      }
      out += line;
    }
    out += all_passed() ? "result=PASS\n" : "result=FAIL\n";
    return out;
  }
};

struct Options {
  std::uint64_t seed = 0;
  std::size_t instances = 200;
};

inline double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

/// n <= 10 tokens in d >= max(n, 4) dimensions with a random query; the
/// materialized query-conditioned kernel.
inline Matrix random_query_kernel(SplitMix64& rng, std::size_t n) {
  const std::size_t lo = std::max<std::size_t>(n, 4);
  const std::size_t d = lo + rng.below(17 - lo);
  const Matrix h = synth::random_embeddings(n, d, rng.next());
  const Matrix q = synth::random_embeddings(1 + rng.below(4), d, rng.next());
  return DppKernel(h, query_relevance(h, q).normalized).materialize();
}

/// Gram matrix of k random unit vectors in R^d.
inline Matrix random_unit_gram(SplitMix64& rng, std::size_t k, std::size_t d) {
  const Matrix v = l2_normalize_rows(synth::random_embeddings(k, d, rng.next()));
  Matrix g = gram_rows(v);
  for (std::size_t i = 0; i < k; ++i) g(i, i) = 1.0;
  return g;
}

/// k orthonormal rows in R^d (k <= d) by modified Gram-Schmidt.
inline Matrix random_orthonormal_rows(SplitMix64& rng, std::size_t k,
                                      std::size_t d) {
  Matrix v = synth::random_embeddings(k, d, rng.next());
  for (std::size_t i = 0; i < k; ++i) {
    auto vi = v.row(i);
    for (std::size_t j = 0; j < i; ++j) {
      const double c = dot(vi, v.row(j));
      auto vj = v.row(j);
      for (std::size_t t = 0; t < d; ++t) vi[t] -= c * vj[t];
    }
    const double nr = norm(vi);
    for (double& x : vi) x /= nr;
  }
  return v;
}

// ---------------------------------------------------------------------------

/// Winner's v2 equals det(L_{S+j}) / det(L_S) (rel 1e-6) whenever
/// det(L_S) > 1e-12; also tracks how often greedy hits the exhaustive optimum.
inline void check_greedy_against_exhaustive(SplitMix64& rng, std::size_t count,
                                            PropertyResult& gain,
                                            PropertyResult& match) {
  std::size_t matches = 0;
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t n = 2 + rng.below(9);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(4, n));
    const ExplicitKernel kernel(random_query_kernel(rng, n));
    const Matrix& l = kernel.matrix();
    GreedyMap<ExplicitKernel> greedy(kernel);
    std::vector<std::size_t> s;
    double det_s = 1.0;
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t j = greedy.next();
      s.push_back(j);
      const double det_sj = oracle::determinant(l.principal(s));
      if (det_s > oracle::kDetZero)
        gain.observe(1e-6 - relative_error(greedy.gains().back(), det_sj / det_s));
      det_s = det_sj;
    }
    const auto best = oracle::brute_force_map(l, k);
    ++match.instances;
    if (relative_error(det_s, best.value) <= 1e-8) ++matches;
  }
  match.statistic = count ? static_cast<double>(matches) / count : 0.0;
}

inline PropertyResult check_prefix_consistency(SplitMix64& rng,
                                               std::size_t count) {
  PropertyResult p{.name = "prefix_consistency"};
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t n = 2 + rng.below(15);
    const Matrix h = synth::random_embeddings(n, 1 + rng.below(8), rng.next());
    const Matrix q = synth::random_embeddings(1, h.cols(), rng.next());
    const DppKernel kernel(h, query_relevance(h, q).normalized);
    const auto full = greedy_map(kernel, n);
    bool ok = true;
    for (std::size_t k = 1; k < n && ok; ++k) {
      const auto part = greedy_map(kernel, k);
      ok = std::equal(part.begin(), part.end(), full.begin());
    }
    p.observe(ok ? 0.0 : -1.0);
  }
  return p;
}

inline PropertyResult check_psd_preservation(SplitMix64& rng,
                                             std::size_t count) {
  PropertyResult p{.name = "kernel_psd"};
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t n = 1 + rng.below(16);
    const Matrix h = synth::random_embeddings(n, 1 + rng.below(12), rng.next());
    const Matrix q = synth::random_embeddings(1 + rng.below(3), h.cols(), rng.next());
    const Matrix l = DppKernel(h, query_relevance(h, q).normalized).materialize();
    p.observe(oracle::min_eigenvalue(l) + 1e-8 * static_cast<double>(n));
  }
  return p;
}

/// det((Q^1/2 S Q^1/2)_I) = prod_{i in I} q_i * det(S_I), rel 1e-8.
inline PropertyResult check_determinant_expansion(SplitMix64& rng,
                                                  std::size_t count) {
  PropertyResult p{.name = "determinant_expansion"};
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t n = 1 + rng.below(8);
    const Matrix s = random_unit_gram(rng, n, n + rng.below(4));
    std::vector<double> q(n);
    for (double& x : q) x = 0.05 + 0.95 * rng.uniform();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        l(i, j) = std::sqrt(q[i]) * s(i, j) * std::sqrt(q[j]);
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.below(2)) subset.push_back(i);
    if (subset.empty()) subset.push_back(rng.below(n));
    double prod = 1.0;
    for (std::size_t i : subset) prod *= q[i];
    const double lhs = oracle::determinant(l.principal(subset));
    const double rhs = prod * oracle::determinant(s.principal(subset));
    p.observe(1e-8 - relative_error(lhs, rhs));
  }
  return p;
}

/// Greedy on log det(I + L_S) reaches (1 - 1/e) of the exhaustive optimum.
inline PropertyResult check_greedy_guarantee(SplitMix64& rng,
                                             std::size_t count) {
  PropertyResult p{.name = "greedy_regularized_bound"};
  const double factor = 1.0 - 1.0 / std::numbers::e;
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t n = 2 + rng.below(9);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(4, n));
    const Matrix l = random_query_kernel(rng, n);
    const double greedy = oracle::greedy_regularized(l, k).value;
    const double best = oracle::brute_force_regularized(l, k).value;
    p.observe(greedy - factor * best);
  }
  return p;
}

/// det(V^T V) = Vol(V)^2 within 1e-8 * max(1, det).
inline PropertyResult check_det_volume(SplitMix64& rng, std::size_t count) {
  PropertyResult p{.name = "det_volume"};
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t d = 1 + rng.below(10);
    const std::size_t k = 1 + rng.below(d);
    const Matrix v = synth::random_embeddings(d, k, rng.next());
    const double g = oracle::gram_det(v);
    const double vol = oracle::parallelotope_volume(v);
    p.observe(1e-8 - std::abs(g - vol * vol) / std::max(1.0, g));
  }
  return p;
}

inline PropertyResult check_hadamard(SplitMix64& rng, std::size_t count) {
  PropertyResult p{.name = "hadamard"};
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t d = 1 + rng.below(10);
    const std::size_t k = 1 + rng.below(8);
    const Matrix g = random_unit_gram(rng, k, d);
    p.observe(oracle::hadamard_margin(g) + 1e-12);
    if (k > d) p.observe(1e-10 - std::abs(oracle::determinant(g)));

    const std::size_t dk = 1 + rng.below(10);
    const std::size_t kk = 1 + rng.below(dk);
    const Matrix ortho = gram_rows(random_orthonormal_rows(rng, kk, dk));
    p.observe(1e-10 - std::abs(oracle::determinant(ortho) - 1.0));
  }
  return p;
}

/// [1 - (k-1) rho_inf]_+^k <= det(L_S) <= 1 on unit-diagonal Grams.
inline PropertyResult check_gershgorin_sandwich(SplitMix64& rng,
                                                std::size_t count) {
  PropertyResult p{.name = "gershgorin_sandwich"};
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t k = 2 + rng.below(7);
    // Wide d keeps the off-diagonals small enough for the bound to bite.
    const std::size_t d = k + rng.below(60);
    const Matrix g = random_unit_gram(rng, k, d);
    const double det = oracle::determinant(g);
    const double lb = oracle::gershgorin_lower_bound(g);
    p.observe(std::min(det - lb, 1.0 + 1e-12 - det));
  }
  return p;
}

/// det(equicorrelation(k, rho)) hits the refined bound exactly, and the bound
/// decreases strictly on (0, 1).
inline PropertyResult check_refined_bound() {
  PropertyResult p{.name = "refined_bound_tightness"};
  for (std::size_t k = 2; k <= 8; ++k) {
    const double lo = oracle::equicorrelation_lower_limit(k);
    for (int g = 0; g < 50; ++g) {
      const double rho = lo + (1.0 - lo) * g / 50.0;
      const double det = oracle::determinant(oracle::equicorrelation_matrix(k, rho));
      p.observe(1e-10 - std::abs(det - oracle::refined_upper_bound(k, rho)));
    }
    double prev = oracle::refined_upper_bound(k, 0.0);
    for (int g = 1; g < 50; ++g) {
      const double cur = oracle::refined_upper_bound(k, g / 50.0);
      p.observe(cur < prev ? 0.0 : -1.0);
      prev = cur;
    }
  }
  return p;
}

/// Among equicorrelated candidate subsets, argmax det = argmin rho_avg =
/// argmin rho_max.
inline PropertyResult check_equicorrelation_equivalence(SplitMix64& rng,
                                                        std::size_t count) {
  PropertyResult p{.name = "equicorrelation_equivalence"};
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t k = 2 + rng.below(7);
    const std::size_t family = 2 + rng.below(6);
    std::set<double> rhos;
    while (rhos.size() < family) rhos.insert(rng.uniform());
    std::vector<double> order(rhos.begin(), rhos.end());
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
    std::size_t by_det = 0, by_avg = 0, by_max = 0;
    double best_det = -1.0, best_avg = 2.0, best_max = 2.0;
    for (std::size_t c = 0; c < order.size(); ++c) {
      const Matrix l = oracle::equicorrelation_matrix(k, order[c]);
      const double det = oracle::determinant(l);
      const auto m = oracle::rho_metrics(l);
      if (det > best_det) best_det = det, by_det = c;
      if (m.rho_avg < best_avg) best_avg = m.rho_avg, by_avg = c;
      if (m.rho_max < best_max) best_max = m.rho_max, by_max = c;
    }
    p.observe(by_det == by_avg && by_det == by_max ? 0.0 : -1.0);
  }
  return p;
}

/// The 2x2 instance where the lower rho_max (c = -1/2) has the lower det.
inline PropertyResult check_counterexample_witness() {
  PropertyResult p{.name = "map_not_min_redundancy_witness"};
  const Matrix neg = oracle::equicorrelation_matrix(2, -0.5);
  const Matrix zero = oracle::equicorrelation_matrix(2, 0.0);
  const double det_neg = oracle::determinant(neg);
  const double det_zero = oracle::determinant(zero);
  p.observe(1e-12 - std::abs(det_neg - 0.75));
  p.observe(1e-12 - std::abs(det_zero - 1.0));
  const bool lower_rho = oracle::rho_metrics(neg).rho_max <
                         oracle::rho_metrics(zero).rho_max;
  p.observe(lower_rho && det_neg < det_zero ? 0.0 : -1.0);
  return p;
}

/// Bipartite graph evaluates ceil(n/2) * floor(n/2) similarities, which is
/// within [0.49, 0.51] of the n(n-1)/2 exhaustive pairs.
inline PropertyResult check_bipartite_cost() {
  PropertyResult p{.name = "bipartite_cost"};
  for (std::size_t n : {64, 576, 2880}) {
    const auto g = build_graph(synth::random_embeddings(n, 2, n));
    const std::size_t expected = ((n + 1) / 2) * (n / 2);
    p.observe(g.similarity_evaluations == expected ? 0.0 : -1.0);
    const double ratio = static_cast<double>(g.similarity_evaluations) /
                         (static_cast<double>(n) * (n - 1) / 2.0);
    p.observe(std::min(ratio - 0.49, 0.51 - ratio));
  }
  return p;
}

/// script_select returns exactly m distinct valid indices, deterministically.
inline PropertyResult check_fusion_contract(SplitMix64& rng,
                                            std::size_t count) {
  PropertyResult p{.name = "fusion_contract"};
  for (std::size_t inst = 0; inst < count; ++inst) {
    const std::size_t n = 1 + rng.below(256);
    const std::size_t m = 1 + rng.below(n);
    const std::size_t d = 1 + rng.below(16);
    const Matrix h = synth::random_embeddings(n, d, rng.next());
    const Matrix q = synth::random_embeddings(1 + rng.below(4), d, rng.next());
    const Selection a = script_select(h, q, m);
    const Selection b = script_select(h, q, m);
    bool ok = a.kept.size() == m && a == b;
    std::vector<bool> seen(n, false);
    for (std::size_t i : a.kept) {
      ok = ok && i < n && !seen[i];
      if (i < n) seen[i] = true;
    }
    p.observe(ok ? 0.0 : -1.0);
  }
  return p;
}

/// Runs every property. Random instance counts scale with
/// options.instances; fixed regression instances always run.
inline Report run_all(const Options& options) {
  Report r;
  r.seed = options.seed;
  r.instances = options.instances;
  SplitMix64 rng(options.seed);
  const std::size_t count = options.instances;

  PropertyResult gain{.name = "marginal_gain"};
  PropertyResult match{.name = "greedy_exhaustive_match_rate", .asserted = false};
  check_greedy_against_exhaustive(rng, count, gain, match);
  r.properties.push_back(gain);
  r.properties.push_back(check_prefix_consistency(rng, count));
  r.properties.push_back(check_psd_preservation(rng, count));
  r.properties.push_back(check_determinant_expansion(rng, count));
  r.properties.push_back(check_greedy_guarantee(rng, count));
  r.properties.push_back(check_det_volume(rng, count));
  r.properties.push_back(check_hadamard(rng, count));
  r.properties.push_back(check_gershgorin_sandwich(rng, count));
  r.properties.push_back(check_refined_bound());
  r.properties.push_back(check_equicorrelation_equivalence(rng, count));
  r.properties.push_back(check_counterexample_witness());
  r.properties.push_back(check_bipartite_cost());
  r.properties.push_back(check_fusion_contract(rng, count));
  r.properties.push_back(match);
  return r;
}

}  // namespace script::verify

#endif  // SCRIPT_VERIFY_HPP_
