// Copyright 2026 The KGA Authors
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

#include "kga/common.hpp"

#include <numeric>
#include <set>

#include <gtest/gtest.h>

namespace kga {
namespace {

TEST(Fnv1a, KnownVectors) {
  Fnv1a empty;
  EXPECT_EQ(empty.digest(), 0xcbf29ce484222325ULL);
  Fnv1a a;
  a.update("a");
  EXPECT_EQ(a.digest(), 0xaf63dc4c8601ec8cULL);
  Fnv1a foobar;
  foobar.update("foobar");
  EXPECT_EQ(foobar.digest(), 0x85944171f73967e8ULL);
}

TEST(FormatNumber, IntegralAndShortest) {
  EXPECT_EQ(format_number(1935), "1935");
  EXPECT_EQ(format_number(-3), "-3");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.5e-7), "2.5e-07");
}

TEST(RoundSignificant, FourDigits) {
  EXPECT_DOUBLE_EQ(round_significant(0.123456, 4), 0.1235);
  EXPECT_DOUBLE_EQ(round_significant(1234.5678, 4), 1235.0);
  EXPECT_DOUBLE_EQ(round_significant(0.0, 4), 0.0);
}

TEST(ParseDouble, WholeStringOnly) {
  double v = 0;
  EXPECT_TRUE(parse_double("3.25", v));
  EXPECT_EQ(v, 3.25);
  EXPECT_TRUE(parse_double("+1e3", v));
  EXPECT_EQ(v, 1000.0);
  EXPECT_FALSE(parse_double("3.25kg", v));
  EXPECT_FALSE(parse_double("", v));
  EXPECT_FALSE(parse_double("abc", v));
}

TEST(Rng, UniformIndexInRangeAndSeeded) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    auto x = uniform_index(a, 7);
    EXPECT_LT(x, 7u);
    EXPECT_EQ(x, uniform_index(b, 7));
  }
  Rng c(1);
  EXPECT_EQ(uniform_index(c, 1), 0u);
  EXPECT_EQ(uniform_index(c, 0), 0u);
}

TEST(Rng, UniformRealInUnitInterval) {
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    double x = uniform_real(r);
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Rng, ShuffleIsPermutation) {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  Rng r(9);
  shuffle(v, r);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Rng, MixSeedSpreads) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(mix_seed(5, t));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
}

TEST(ParallelFor, CoversRangeOnce) {
  for (int threads : {1, 3, 8}) {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(SplitTabs, KeepsEmptyColumns) {
  auto cols = split_tabs("a\t\tc");
  ASSERT_EQ(cols.size(), 3u);
  EXPECT_EQ(cols[1], "");
  EXPECT_EQ(split_tabs("x").size(), 1u);
}

TEST(Error, CarriesKind) {
  EXPECT_EQ(data_error("x").kind(), ErrorKind::kData);
  EXPECT_EQ(usage_error("x").kind(), ErrorKind::kUsage);
  EXPECT_EQ(static_cast<int>(ErrorKind::kDivergence), 3);
}

}  // namespace
}  // namespace kga
