// Copyright 2026 The BAM Authors
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

#include "bam/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

namespace bam {
namespace {

TEST(Rng, SamePathSameStream) {
  Rng a = make_rng(42, {1, 2, role(StreamRole::kTeacher)});
  Rng b = make_rng(42, {1, 2, role(StreamRole::kTeacher)});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, DistinctPathsGiveDistinctSeeds) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t agent = 0; agent < 20; ++agent) {
    for (std::uint64_t round = 0; round < 10; ++round) {
      for (std::uint64_t r = 1; r <= 6; ++r) seeds.insert(derive_seed(7, {agent, round, r}));
    }
  }
  EXPECT_EQ(seeds.size(), 20u * 10u * 6u);
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
  EXPECT_NE(derive_seed(7, {}), derive_seed(8, {}));
  EXPECT_NE(derive_seed(7, {0}), derive_seed(7, {0, 0}));
}

TEST(Rng, Uniform01InRangeWithCorrectMean) {
  Rng rng = make_rng(3, {});
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Standard error of the mean is sqrt(1/12 / n).
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, UniformIndexCoversRangeEvenly) {
  Rng rng = make_rng(5, {});
  const int k = 7;
  const int n = 70000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    const int v = uniform_index(rng, k);
    ASSERT_GE(v, 0);
    ASSERT_LT(v, k);
    ++counts[v];
  }
  const double p = 1.0 / k;
  for (int c : counts) EXPECT_NEAR(c, n * p, 4.0 * std::sqrt(n * p * (1 - p)));
}

TEST(Rng, KnownFirstDrawIsStable) {
  // Reproducibility across builds depends on these staying fixed.
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
  Rng rng(derive_seed(1, {}));
  Rng again(derive_seed(1, {}));
  EXPECT_EQ(rng(), again());
}

}  // namespace
}  // namespace bam
