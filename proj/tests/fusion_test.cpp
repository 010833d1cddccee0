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

#include "script/fusion.hpp"

#include <gtest/gtest.h>

#include <set>

#include "test_util.hpp"

namespace script {
namespace {

using testing::error_code_of;

std::vector<bool> mask(std::size_t n, std::initializer_list<std::size_t> on) {
  std::vector<bool> m(n, false);
  for (std::size_t i : on) m[i] = true;
  return m;
}

TEST(Fuse, IntersectionInGreedyOrder) {
  const Selection s = fuse(mask(6, {0, 1, 2}), 2, std::vector<std::size_t>{2, 0, 5, 1, 3, 4});
  EXPECT_EQ(s.kept, (std::vector<std::size_t>{2, 0}));
  EXPECT_EQ(s.stage_tags, (std::vector<StageTag>{StageTag::kIntersection,
                                                  StageTag::kIntersection}));
}

TEST(Fuse, FillsFromOrderAfterCandidatesRunOut) {
  const Selection s = fuse(mask(4, {3}), 2, std::vector<std::size_t>{0, 1, 2, 3});
  EXPECT_EQ(s.kept, (std::vector<std::size_t>{3, 0}));
  EXPECT_EQ(s.stage_tags,
            (std::vector<StageTag>{StageTag::kIntersection, StageTag::kQcspFill}));
}

TEST(Fuse, StopsPullingOnceBudgetIsMet) {
  std::size_t pulled = 0;
  const std::vector<std::size_t> order = {4, 1, 0, 2, 3};
  const Selection s = fuse(mask(5, {1, 2}), 1, [&]() -> std::optional<std::size_t> {
    return order[pulled++];
  });
  EXPECT_EQ(s.kept, (std::vector<std::size_t>{1}));
  EXPECT_EQ(pulled, 2u);
}

TEST(Fuse, BudgetAboveN) {
  EXPECT_EQ(error_code_of([] { fuse(mask(2, {0}), 3, std::vector<std::size_t>{0, 1}); }),
            Errc::kOutOfRange);
}

TEST(Script, AllTokensWhenBudgetIsN) {
  const Matrix h = testing::gaussian(9, 5, 1), q = testing::gaussian(2, 5, 2);
  auto kept = script_select(h, q, 9).kept;
  std::sort(kept.begin(), kept.end());
  EXPECT_EQ(kept, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(Script, ContractOnRandomInstances) {
  std::mt19937 gen(3);
  for (unsigned trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + gen() % 64, m = 1 + gen() % n, d = 1 + gen() % 9;
    const Matrix h = testing::gaussian(n, d, trial), q = testing::gaussian(2, d, trial + 500);
    const Selection s = script_select(h, q, m);
    ASSERT_EQ(s.kept.size(), m);
    ASSERT_EQ(std::set<std::size_t>(s.kept.begin(), s.kept.end()).size(), m);
    for (std::size_t i : s.kept) ASSERT_LT(i, n);
    ASSERT_EQ(s, script_select(h, q, m));
    EXPECT_EQ(s.mode, "script");
    EXPECT_EQ(s.params.at("gsp_keep"), static_cast<double>(std::min(n, 2 * m)));
  }
}

TEST(Script, IntersectionTagsComeFromPoolAndGreedyPrefix) {
  for (unsigned seed = 0; seed < 30; ++seed) {
    const std::size_t n = 40, m = 7;
    const Matrix h = testing::gaussian(n, 6, seed), q = testing::gaussian(3, 6, seed + 1);
    const Selection s = script_select(h, q, m);
    const auto pool = gsp_select(h, 2 * m).kept;
    const auto order = qcsp_select(h, q, n);
    std::size_t prefix = 0;
    for (std::size_t t = 0; t < m; ++t) {
      ASSERT_EQ(s.stage_tags[t], StageTag::kIntersection);
      ASSERT_TRUE(std::binary_search(pool.begin(), pool.end(), s.kept[t]));
      const auto pos = std::find(order.begin(), order.end(), s.kept[t]) - order.begin();
      ASSERT_GE(static_cast<std::size_t>(pos), prefix);
      prefix = pos;
    }
  }
}

TEST(Script, ZeroQueryMatchesDiversityPipeline) {
  const Matrix h = testing::gaussian(30, 4, 5);
  const Matrix zero(2, 4);
  EXPECT_EQ(script_select(h, zero, 8).kept, script_select(h, nullptr, 8).kept);
}

TEST(Script, CustomPoolAndLazyKernelAgree) {
  const Matrix h = testing::gaussian(50, 8, 6), q = testing::gaussian(1, 8, 7);
  FusionParams eager;
  eager.gsp_keep = 20;
  FusionParams lazy = eager;
  lazy.kernel.materialize_threshold = 0;
  EXPECT_EQ(script_select(h, q, 10, eager), script_select(h, q, 10, lazy));
}

TEST(Script, RejectsBadArguments) {
  const Matrix h = testing::gaussian(6, 3, 8), q = testing::gaussian(1, 3, 9);
  EXPECT_EQ(error_code_of([&] { script_select(h, q, 0); }), Errc::kOutOfRange);
  EXPECT_EQ(error_code_of([&] { script_select(h, q, 7); }), Errc::kOutOfRange);
  FusionParams params;
  params.gsp_keep = 2;
  EXPECT_EQ(error_code_of([&] { script_select(h, q, 3, params); }), Errc::kOutOfRange);
  params.gsp_keep = 7;
  EXPECT_EQ(error_code_of([&] { script_select(h, q, 3, params); }), Errc::kOutOfRange);
  EXPECT_EQ(error_code_of([&] { script_select(h, Matrix(1, 4), 3); }),
            Errc::kDimensionMismatch);
}

TEST(Random, Examples) {
  auto all = baseline_random(5, 5, 1).kept;
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(baseline_random(100, 10, 42), baseline_random(100, 10, 42));
  for (std::uint64_t s = 0; s < 10; ++s)
    EXPECT_NE(baseline_random(1000, 100, 2 * s).kept,
              baseline_random(1000, 100, 2 * s + 1).kept);
  EXPECT_EQ(error_code_of([] { baseline_random(3, 4, 0); }), Errc::kOutOfRange);
}

TEST(Random, RoughlyUniform) {
  std::vector<int> hits(10, 0);
  for (std::uint64_t s = 0; s < 2000; ++s)
    for (std::size_t i : baseline_random(10, 3, s).kept) ++hits[i];
  for (int h : hits) EXPECT_NEAR(h, 600, 90);
}

TEST(TopK, Examples) {
  Matrix h = testing::gaussian(12, 4, 10);
  const Matrix q(1, 4, std::vector<double>(h.row(7).begin(), h.row(7).end()));
  EXPECT_EQ(baseline_topk_relevance(h, q, 1).kept, (std::vector<std::size_t>{7}));
  const Matrix same{{1, 2}, {1, 2}, {1, 2}};
  EXPECT_EQ(baseline_topk_relevance(same, Matrix{{0, 1}}, 2).kept,
            (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(baseline_topk_relevance(same, Matrix{{0, 1}}, 3).kept.size(), 3u);
  EXPECT_EQ(error_code_of([&] { baseline_topk_relevance(same, Matrix{{0, 1}}, 4); }),
            Errc::kOutOfRange);
}

TEST(Diversity, Examples) {
  EXPECT_EQ(baseline_diversity_only(Matrix::identity(5), 3).kept,
            (std::vector<std::size_t>{0, 1, 2}));
  const double r = std::sqrt(0.5);
  auto kept = baseline_diversity_only(Matrix{{1, 0}, {0, 1}, {r, r}}, 2).kept;
  std::sort(kept.begin(), kept.end());
  EXPECT_EQ(kept, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(baseline_diversity_only(Matrix::identity(4), 4).kept.size(), 4u);
  EXPECT_EQ(baseline_diversity_only(Matrix::identity(4), 2).mode, "diversity");
}

TEST(GspOnly, DelegatesToGspSelect) {
  const Matrix h = testing::gaussian(20, 3, 11);
  EXPECT_EQ(baseline_gsp_only(h, 6), gsp_select(h, 6));
}

TEST(QcspOnly, EmptyBudgetAndTags) {
  const Matrix h = testing::gaussian(5, 3, 12);
  EXPECT_TRUE(qcsp_only(h, nullptr, 0).kept.empty());
  const Selection s = qcsp_only(h, nullptr, 2);
  EXPECT_EQ(s.stage_tags, std::vector<StageTag>(2, StageTag::kQcspOnly));
}

}  // namespace
}  // namespace script
