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

#ifndef SCRIPT_QCSP_HPP_
#define SCRIPT_QCSP_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "script/common.hpp"
#include "script/similarity.hpp"

namespace script {

/// Floor on each greedy pivot before its square root is taken.
inline constexpr double kGreedyEpsilon = 1e-6;

/// Anything greedy MAP can run on: a symmetric PSD kernel that can hand out
/// its diagonal and one full row at a time.
template <class K>
concept KernelRows = requires(const K& k, std::size_t i, std::span<double> out) {
  { k.size() } -> std::convertible_to<std::size_t>;
  { k.diagonal(i) } -> std::convertible_to<double>;
  k.row(i, out);
};

/// Kernel given as an explicit dense matrix.
class ExplicitKernel {
 public:
  explicit ExplicitKernel(Matrix l) : l_(std::move(l)) {
    require(l_.rows() == l_.cols(), Errc::kDimensionMismatch,
            "kernel matrix must be square");
  }

  std::size_t size() const { return l_.rows(); }
  double diagonal(std::size_t i) const { return l_(i, i); }
  double operator()(std::size_t i, std::size_t j) const { return l_(i, j); }
  void row(std::size_t j, std::span<double> out) const {
    auto r = l_.row(j);
    std::copy(r.begin(), r.end(), out.begin());
  }
  const Matrix& matrix() const { return l_; }

 private:
  Matrix l_;
};

struct KernelOptions {
  // Similarity is precomputed in full when n is at most this; above it,
  // rows are produced on demand from the normalized embeddings.
  std::size_t materialize_threshold = 4096;
};

/// Query-conditioned kernel L(i, j) = r_i * cos(h_i, h_j) * r_j.
class DppKernel {
 public:
  DppKernel(const Matrix& h_v, std::span<const double> relevance,
            const KernelOptions& options = {})
      : unit_rows_(l2_normalize_rows(h_v)),
        relevance_(relevance.begin(), relevance.end()) {
    require(relevance_.size() == h_v.rows(), Errc::kDimensionMismatch,
            "kernel: relevance has " + std::to_string(relevance_.size()) +
                " entries for " + std::to_string(h_v.rows()) + " tokens");
    for (double r : relevance_)
      require(r >= 0.0 && r <= 1.0, Errc::kInvalidArgument,
              "kernel: relevance must lie in [0, 1]");
    if (size() <= options.materialize_threshold) {
      similarity_ = gram_rows(unit_rows_);
      for (double& v : similarity_.data()) v = std::clamp(v, -1.0, 1.0);
    }
  }

  std::size_t size() const { return unit_rows_.rows(); }
  bool materialized() const { return !similarity_.empty() || size() == 0; }
  std::span<const double> relevance() const { return relevance_; }
  /// Full cosine similarity matrix; empty unless materialized.
  const Matrix& similarity_matrix() const { return similarity_; }

  double similarity(std::size_t i, std::size_t j) const {
    if (!similarity_.empty()) return similarity_(i, j);
    return std::clamp(dot(unit_rows_.row(i), unit_rows_.row(j)), -1.0, 1.0);
  }

  double operator()(std::size_t i, std::size_t j) const {
    return (relevance_[i] * relevance_[j]) * similarity(i, j);
  }

  double diagonal(std::size_t i) const { return (*this)(i, i); }

  void row(std::size_t j, std::span<double> out) const {
    if (!similarity_.empty()) {
      auto s = similarity_.row(j);
      std::copy(s.begin(), s.end(), out.begin());
    } else {
      dot_rows(unit_rows_.row(j), unit_rows_, 0, out);
      for (double& v : out) v = std::clamp(v, -1.0, 1.0);
    }
    const double rj = relevance_[j];
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (rj * relevance_[i]) * out[i];
  }

  Matrix materialize() const {
    Matrix l(size(), size());
    for (std::size_t j = 0; j < size(); ++j) row(j, l.row(j));
    return l;
  }

 private:
  Matrix unit_rows_;
  std::vector<double> relevance_;
  Matrix similarity_;
};

inline DppKernel build_kernel(const Matrix& h_v,
                              std::span<const double> r_norm,
                              const KernelOptions& options = {}) {
  return DppKernel(h_v, r_norm, options);
}

/// Incremental Cholesky greedy MAP for max det(L_S).
///
/// State per candidate i: residual gain v2[i] = L_ii - |u_i|^2 and the
/// coefficient vector u_i (one entry per step so far). Each step takes
/// j = argmax v2 over unselected candidates with v2 > 0 (ties to the lower
/// index), then for every other candidate
///
///   e_i  = (L_ji - <u_j, u_i>) / sqrt(max(v2_j, eps))
///   u_i <- [u_i, e_i]
///   v2_i <- v2_i - e_i^2
///
/// Once every remaining v2 is <= 0 the kernel's rank is exhausted and the
/// lowest unselected index is taken instead, so any budget up to n can be
/// filled. Updates only ever shrink v2, so from then on every step is such a
/// fallback and the updates are skipped.
///
/// Pivots above eps are exact, so each winner's v2 is the true ratio
/// det(L_{S+j}) / det(L_S). The output for budget k is always a prefix of
/// the output for k+1.
template <KernelRows Kernel>
class GreedyMap {
 public:
  explicit GreedyMap(const Kernel& kernel, double epsilon = kGreedyEpsilon)
      : kernel_(&kernel),
        epsilon_(epsilon),
        v2_(kernel.size()),
        chosen_(kernel.size(), false),
        row_(kernel.size()) {
    for (std::size_t i = 0; i < v2_.size(); ++i) v2_[i] = kernel.diagonal(i);
  }

  std::size_t size() const { return v2_.size(); }
  std::size_t steps() const { return selected_.size(); }
  bool done() const { return selected_.size() == v2_.size(); }

  /// Selection order so far.
  const std::vector<std::size_t>& selected() const { return selected_; }
  /// Winner's v2 at the moment it was taken, one per step.
  const std::vector<double>& gains() const { return gains_; }
  /// Current residual gains (stale for already-selected indices).
  std::span<const double> residual_gains() const { return v2_; }
  /// Number of steps taken after the rank was exhausted.
  std::size_t fallback_steps() const { return fallback_steps_; }

  /// |u_i|^2 over all non-fallback steps so far.
  double coefficient_norm_sq(std::size_t i) const {
    double s = 0.0;
    for (const auto& col : u_) s += col[i] * col[i];
    return s;
  }

  std::size_t next() {
    require(!done(), Errc::kOutOfRange, "greedy: all candidates selected");
    const std::size_t n = v2_.size();
    std::size_t j = n;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen_[i] && v2_[i] > best) {
        best = v2_[i];
        j = i;
      }
    }
    if (j == n) {
      j = static_cast<std::size_t>(
          std::find(chosen_.begin(), chosen_.end(), false) - chosen_.begin());
      ++fallback_steps_;
      gains_.push_back(v2_[j]);
      chosen_[j] = true;
      selected_.push_back(j);
      return j;
    }

    const double pivot = std::sqrt(std::max(v2_[j], epsilon_));
    kernel_->row(j, row_);
    std::vector<double> e(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (!chosen_[i] && i != j) e[i] = row_[i];
    for (const auto& col : u_) {
      const double uj = col[j];
      if (uj == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) e[i] -= uj * col[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen_[i] || i == j) {
        e[i] = 0.0;
        continue;
      }
      e[i] /= pivot;
      v2_[i] -= e[i] * e[i];
    }

    gains_.push_back(v2_[j]);
    chosen_[j] = true;
    selected_.push_back(j);
    u_.push_back(std::move(e));
    return j;
  }

 private:
  const Kernel* kernel_;
  double epsilon_;
  std::vector<double> v2_;
  std::vector<bool> chosen_;
  std::vector<double> row_;
  // u_[t][i]: coefficient of candidate i on step t's pivot direction.
  std::vector<std::vector<double>> u_;
  std::vector<std::size_t> selected_;
  std::vector<double> gains_;
  std::size_t fallback_steps_ = 0;
};

template <KernelRows Kernel>
std::vector<std::size_t> greedy_map(const Kernel& kernel, std::size_t k,
                                    double epsilon = kGreedyEpsilon) {
  require(k >= 1 && k <= kernel.size(), Errc::kOutOfRange,
          "greedy budget must lie in [1, " + std::to_string(kernel.size()) +
              "], got " + std::to_string(k));
  GreedyMap<Kernel> g(kernel, epsilon);
  while (g.steps() < k) g.next();
  return g.selected();
}

inline std::vector<std::size_t> greedy_map(const Matrix& l, std::size_t k,
                                           double epsilon = kGreedyEpsilon) {
  return greedy_map(ExplicitKernel(l), k, epsilon);
}

/// Normalized relevance against the mean query, or all ones when there is
/// no query.
inline std::vector<double> qcsp_relevance(const Matrix& h_v,
                                          const Matrix* h_q) {
  if (h_q == nullptr) return std::vector<double>(h_v.rows(), 1.0);
  return query_relevance(h_v, *h_q).normalized;
}

/// mean_pool -> relevance -> min-max -> kernel -> greedy MAP.
/// A null query gives the diversity-only variant.
inline std::vector<std::size_t> qcsp_select(const Matrix& h_v,
                                            const Matrix* h_q, std::size_t k,
                                            const KernelOptions& options = {}) {
  if (h_q) {
    require(h_q->cols() == h_v.cols(), Errc::kDimensionMismatch,
            "query dimension " + std::to_string(h_q->cols()) +
                " does not match token dimension " +
                std::to_string(h_v.cols()));
  }
  const auto r = qcsp_relevance(h_v, h_q);
  return greedy_map(build_kernel(h_v, r, options), k);
}

inline std::vector<std::size_t> qcsp_select(const Matrix& h_v,
                                            const Matrix& h_q, std::size_t k,
                                            const KernelOptions& options = {}) {
  return qcsp_select(h_v, &h_q, k, options);
}

}  // namespace script

#endif  // SCRIPT_QCSP_HPP_
