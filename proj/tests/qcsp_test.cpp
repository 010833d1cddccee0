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

#include "script/qcsp.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <set>

#include "test_util.hpp"

namespace script {
namespace {

using testing::error_code_of;
using testing::naive_det;

const double kRootHalf = std::sqrt(0.5);

TEST(Kernel, OrthonormalTokensGiveIdentity) {
  const DppKernel k(Matrix::identity(4), std::vector<double>(4, 1.0));
  EXPECT_EQ(k.materialize(), Matrix::identity(4));
}

TEST(Kernel, UniformRelevanceScalesSimilarity) {
  const Matrix h = testing::gaussian(6, 3, 1);
  const Matrix s = cosine_similarity_matrix(h, h);
  const Matrix l = DppKernel(h, std::vector<double>(6, 0.5)).materialize();
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(l(i, j), 0.25 * s(i, j), 1e-15);
}

TEST(Kernel, IdenticalTokensWithUnequalRelevance) {
  const Matrix l = DppKernel(Matrix{{2, 0}, {2, 0}}, std::vector<double>{1, 0.5}).materialize();
  EXPECT_EQ(l, (Matrix{{1, 0.5}, {0.5, 0.25}}));
}

TEST(Kernel, OnDemandRowsMatchMaterializedBits) {
  const Matrix h = testing::gaussian(23, 11, 2);
  std::vector<double> r(23);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (i + 1) / 23.0;
  const DppKernel eager(h, r);
  const DppKernel lazy(h, r, {.materialize_threshold = 0});
  EXPECT_TRUE(eager.materialized());
  EXPECT_FALSE(lazy.materialized());
  EXPECT_EQ(eager.materialize(), lazy.materialize());
  EXPECT_EQ(greedy_map(eager, 23), greedy_map(lazy, 23));
}

TEST(Kernel, SymmetricWithSquaredRelevanceDiagonal) {
  const Matrix h = testing::gaussian(12, 5, 3);
  std::vector<double> r(12);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.05 + 0.08 * i;
  const Matrix l = DppKernel(h, r).materialize();
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_NEAR(l(i, i), r[i] * r[i], 1e-15);
    for (std::size_t j = 0; j < 12; ++j) EXPECT_EQ(l(i, j), l(j, i));
  }
}

TEST(Kernel, RejectsBadRelevance) {
  const Matrix h = testing::gaussian(3, 2, 4);
  EXPECT_EQ(error_code_of([&] { DppKernel(h, std::vector<double>{1, 1}); }),
            Errc::kDimensionMismatch);
  EXPECT_EQ(error_code_of([&] { DppKernel(h, std::vector<double>{1, 1.5, 0}); }),
            Errc::kInvalidArgument);
  EXPECT_EQ(error_code_of([&] { DppKernel(h, std::vector<double>{1, -0.1, 0}); }),
            Errc::kInvalidArgument);
  EXPECT_EQ(error_code_of([] { ExplicitKernel(Matrix(2, 3)); }), Errc::kDimensionMismatch);
}

TEST(Kernel, PsdOnRandomInputs) {
  std::mt19937 gen(5);
  for (unsigned trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + gen() % 16, d = 1 + gen() % 12;
    const Matrix h = testing::gaussian(n, d, trial), q = testing::gaussian(2, d, trial + 7777);
    const Matrix l = DppKernel(h, query_relevance(h, q).normalized).materialize();
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e(i, j) = l(i, j);
    ASSERT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues().minCoeff(),
              -1e-8 * n);
  }
}

TEST(Greedy, Examples) {
  EXPECT_EQ(greedy_map(Matrix::identity(3), 1), (std::vector<std::size_t>{0}));
  const Matrix h{{1, 0}, {0, 1}, {kRootHalf, kRootHalf}};
  const DppKernel k(h, std::vector<double>(3, 1.0));
  auto s = greedy_map(k, 2);
  std::sort(s.begin(), s.end());
  EXPECT_EQ(s, (std::vector<std::size_t>{0, 1}));

  const Matrix l{{1, 0.5}, {0.5, 1}};
  const ExplicitKernel ek(l);
  GreedyMap<ExplicitKernel> gm(ek);
  gm.next();
  gm.next();
  EXPECT_EQ(gm.selected(), (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(gm.gains()[0] * gm.gains()[1], 0.75, 1e-15);
}

TEST(Greedy, BudgetOutOfRange) {
  const Matrix l = Matrix::identity(3);
  EXPECT_EQ(error_code_of([&] { greedy_map(l, 0); }), Errc::kOutOfRange);
  EXPECT_EQ(error_code_of([&] { greedy_map(l, 4); }), Errc::kOutOfRange);
  const ExplicitKernel k(l);
  GreedyMap<ExplicitKernel> g(k);
  for (int i = 0; i < 3; ++i) g.next();
  EXPECT_TRUE(g.done());
  EXPECT_EQ(error_code_of([&] { g.next(); }), Errc::kOutOfRange);
}

TEST(Greedy, RankExhaustionFallsBackToAscendingIndex) {
  const Matrix h{{1, 0}, {0, 1}, {1, 0}, {0, 2}, {3, 0}};
  const DppKernel k(h, std::vector<double>(5, 1.0));
  GreedyMap<DppKernel> g(k);
  while (!g.done()) g.next();
  // Rank 2: tokens 0 and 1 span everything, then 2, 3, 4 in index order.
  EXPECT_EQ(g.selected(), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(g.fallback_steps(), 3u);
}

Matrix random_kernel(unsigned seed, std::size_t n, std::size_t d) {
  const Matrix h = testing::gaussian(n, d, seed), q = testing::gaussian(3, d, seed + 99);
  return DppKernel(h, query_relevance(h, q).normalized).materialize();
}

TEST(Greedy, WinnerGainIsDeterminantRatio) {
  std::size_t checked = 0;
  for (unsigned seed = 0; seed < 200; ++seed) {
    const std::size_t n = 2 + seed % 9;
    const Matrix l = random_kernel(seed, n, std::max<std::size_t>(n, 4) + seed % 5);
    const ExplicitKernel k(l);
    GreedyMap<ExplicitKernel> g(k);
    double prev = 1.0;
    for (std::size_t step = 0; step < std::min<std::size_t>(4, n); ++step) {
      g.next();
      const double det = naive_det(l.principal(g.selected()));
      if (prev > 1e-12) {
        ASSERT_NEAR(g.gains().back(), det / prev, 1e-6 * det / prev);
        ++checked;
      }
      prev = det;
    }
  }
  EXPECT_GT(checked, 500u);
}

TEST(Greedy, ResidualsTrackCoefficientNorms) {
  for (unsigned seed = 0; seed < 30; ++seed) {
    const Matrix l = random_kernel(seed, 14, 6);
    const ExplicitKernel k(l);
    GreedyMap<ExplicitKernel> g(k);
    while (!g.done()) {
      g.next();
      for (std::size_t i = 0; i < 14; ++i) {
        if (std::find(g.selected().begin(), g.selected().end(), i) != g.selected().end())
          continue;
        ASSERT_NEAR(g.residual_gains()[i], l(i, i) - g.coefficient_norm_sq(i), 1e-8);
        ASSERT_GE(g.residual_gains()[i], -1e-9);
      }
    }
  }
}

TEST(Greedy, PrefixConsistency) {
  for (unsigned seed = 0; seed < 40; ++seed) {
    const Matrix l = random_kernel(seed, 12, 1 + seed % 7);
    const auto full = greedy_map(l, 12);
    for (std::size_t k = 1; k < 12; ++k) {
      const auto part = greedy_map(l, k);
      ASSERT_TRUE(std::equal(part.begin(), part.end(), full.begin()));
    }
  }
}

TEST(Greedy, PrefersHigherRelevanceDuplicate) {
  const Matrix h{{1, 2, 3}, {1, 2, 3}};
  EXPECT_EQ(greedy_map(DppKernel(h, std::vector<double>{0.4, 0.9}), 1),
            (std::vector<std::size_t>{1}));
  EXPECT_EQ(greedy_map(DppKernel(h, std::vector<double>{0.9, 0.4}), 1),
            (std::vector<std::size_t>{0}));
}

TEST(Greedy, AvoidsDuplicatesWhileDistinctTokensRemain) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    // 6 distinct directions, each repeated 3 times at scattered positions.
    const Matrix base = testing::gaussian(6, 8, seed);
    Matrix h(18, 8);
    std::vector<std::size_t> owner(18);
    for (std::size_t i = 0; i < 18; ++i) {
      owner[i] = (i * 7) % 6;
      std::copy(base.row(owner[i]).begin(), base.row(owner[i]).end(), h.row(i).begin());
    }
    const auto order = greedy_map(DppKernel(h, std::vector<double>(18, 1.0)), 6);
    std::set<std::size_t> seen;
    for (std::size_t i : order) EXPECT_TRUE(seen.insert(owner[i]).second);
  }
}

TEST(Qcsp, Examples) {
  const Matrix h{{1, 0}, {0, 1}};
  const Matrix q{{0, 1}};
  EXPECT_EQ(qcsp_select(h, q, 1), (std::vector<std::size_t>{1}));
  const Matrix dup{{1, 1}, {1, 1}, {1, 1}};
  EXPECT_EQ(qcsp_select(dup, Matrix{{1, 0}}, 1), (std::vector<std::size_t>{0}));
  const Matrix r = testing::gaussian(9, 4, 6);
  auto all = qcsp_select(r, testing::gaussian(2, 4, 7), 9);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(Qcsp, NoQueryMeansUniformRelevance) {
  const Matrix h = testing::gaussian(10, 4, 8);
  EXPECT_EQ(qcsp_select(h, nullptr, 5),
            greedy_map(DppKernel(h, std::vector<double>(10, 1.0)), 5));
}

TEST(Qcsp, QueryDimensionMismatch) {
  EXPECT_EQ(error_code_of([] {
              qcsp_select(Matrix::identity(3), Matrix{{1, 0}}, 1);
            }),
            Errc::kDimensionMismatch);
}

}  // namespace
}  // namespace script
