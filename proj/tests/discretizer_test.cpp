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

#include "kga/discretizer.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace kga {
namespace {

AttributeValues values_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return {v, v.front(), v.back(), v.size()};
}

std::vector<double> cuts_of(const BinLevel& level) {
  std::vector<double> c;
  for (const auto& b : level) c.push_back(b.lo);
  c.push_back(level.back().hi);
  return c;
}

TEST(FixedIntervals, EqualWidthAndClosedLast) {
  auto iv = fixed_intervals(0, 10, 4);
  ASSERT_EQ(iv.size(), 4u);
  EXPECT_EQ(iv[1].lo, 2.5);
  EXPECT_EQ(iv[3].hi, 10);
  EXPECT_TRUE(iv[3].closed);
  EXPECT_FALSE(iv[2].closed);
  auto one = fixed_intervals(5, 5, 3);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one[0].contains(5));
}

TEST(QuantileIntervals, DistinctValuesBalanced) {
  std::vector<double> v;
  for (int i = 0; i < 10; ++i) v.push_back(i);
  auto iv = quantile_intervals(v, 3);
  ASSERT_EQ(iv.size(), 3u);
  // Cuts before positions ceil(10/3)=4 and ceil(20/3)=7.
  EXPECT_EQ(iv[1].lo, 4);
  EXPECT_EQ(iv[2].lo, 7);
}

TEST(QuantileIntervals, NeverSplitsRuns) {
  std::vector<double> v{1, 1, 1, 1, 1, 2, 3, 4};
  auto iv = quantile_intervals(v, 2);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_EQ(iv[1].lo, 2);
  auto few = quantile_intervals(std::vector<double>{7, 7, 7}, 4);
  ASSERT_EQ(few.size(), 1u);
  EXPECT_TRUE(few[0].closed);
}

TEST(QuantileIntervals, MatchesOracleOnRandomData) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + static_cast<int>(uniform_index(rng, 80));
    int b = 1 + static_cast<int>(uniform_index(rng, 12));
    int range = 1 + static_cast<int>(uniform_index(rng, 40));
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(static_cast<double>(uniform_index(rng, range)));
    std::sort(v.begin(), v.end());
    auto got = quantile_intervals(v, b);
    auto want = oracle::from_cuts(oracle::quantile_cuts(v, b));
    ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].lo, want[i].lo);
      EXPECT_EQ(got[i].hi, want[i].hi);
      EXPECT_EQ(got[i].closed, want[i].closed);
    }
  }
}

// The worked example: leaf cuts 1, 1882, 1935, 1966, 2021 and the value 1961.
TEST(WorkedExample, SingleLevel) {
  std::vector<double> cuts{1, 1882, 1935, 1966, 2021};
  auto level = make_single_bins(0, intervals_from_cuts(cuts));
  int i = locate_in_disjoint_level(level, 1961);
  EXPECT_EQ(level[i].lo, 1935);
  EXPECT_EQ(level[i].hi, 1966);
}

TEST(WorkedExample, Overlapping) {
  std::vector<double> aux{1, 1826, 1882, 1912, 1935, 1951, 1966, 1982, 2021};
  AttributeBins bins;
  bins.spec.levels = LevelStrategy::kOverlapping;
  bins.levels.push_back(make_overlapping_bins(0, intervals_from_cuts(aux)));
  ASSERT_EQ(bins.levels[0].size(), 7u);
  std::vector<std::pair<double, double>> got;
  for (auto r : bins.assign(1961)) {
    got.emplace_back(bins.bin(r).lo, bins.bin(r).hi);
  }
  std::vector<std::pair<double, double>> want{{1935, 1966}, {1951, 1982}};
  EXPECT_EQ(got, want);
}

TEST(WorkedExample, Hierarchy) {
  std::vector<double> cuts{1, 1882, 1935, 1966, 2021};
  AttributeBins bins;
  bins.spec.levels = LevelStrategy::kHierarchy;
  bins.levels = make_hierarchy_bins(0, hierarchy_from_leaf_cuts(cuts, 2));
  ASSERT_EQ(bins.levels.size(), 3u);
  auto refs = bins.assign(1961);
  ASSERT_EQ(refs.size(), 3u);
  EXPECT_EQ(bins.bin(refs[0]).lo, 1);
  EXPECT_EQ(bins.bin(refs[0]).hi, 2021);
  EXPECT_TRUE(bins.bin(refs[0]).closed);
  EXPECT_EQ(bins.bin(refs[1]).lo, 1935);
  EXPECT_EQ(bins.bin(refs[1]).hi, 2021);
  EXPECT_EQ(bins.bin(refs[2]).lo, 1935);
  EXPECT_EQ(bins.bin(refs[2]).hi, 1966);
  EXPECT_EQ(bins.bin(refs[2]).parent, refs[1].index);
  EXPECT_EQ(bins.bin(refs[1]).parent, refs[0].index);
}

TEST(BuildAttributeBins, SingleMatchesOracleAndPartitions) {
  std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9};
  for (auto strat : {IntervalStrategy::kFixed, IntervalStrategy::kQuantile}) {
    BinSpec spec;
    spec.interval = strat;
    spec.bins = 4;
    auto bins = build_attribute_bins(0, values_of(v), spec);
    ASSERT_EQ(bins.levels.size(), 1u);
    auto want = strat == IntervalStrategy::kFixed
                    ? oracle::fixed_cuts(1, 9, 4)
                    : oracle::quantile_cuts(v, 4);
    EXPECT_EQ(cuts_of(bins.levels[0]), want);
    std::size_t total = 0;
    for (const auto& b : bins.levels[0]) {
      total += b.training_values.size();
      for (double x : b.training_values) EXPECT_TRUE(b.contains(x));
    }
    EXPECT_EQ(total, v.size());
  }
}

TEST(BuildAttributeBins, OverlappingHasTwoBMinusOneBins) {
  std::vector<double> v;
  for (int i = 0; i < 40; ++i) v.push_back(i * 1.5);
  BinSpec spec;
  spec.levels = LevelStrategy::kOverlapping;
  spec.bins = 5;
  auto bins = build_attribute_bins(0, values_of(v), spec);
  ASSERT_EQ(bins.levels.size(), 1u);
  EXPECT_EQ(bins.levels[0].size(), 9u);
  // Every value away from the ends sits in exactly two bins.
  for (double x : v) {
    auto refs = bins.assign(x);
    EXPECT_GE(refs.size(), 1u);
    EXPECT_LE(refs.size(), 2u);
  }
  EXPECT_EQ(bins.assign(v[20]).size(), 2u);
}

TEST(BuildAttributeBins, HierarchyLevelCounts) {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(std::exp(i / 20.0));
  for (auto strat : {IntervalStrategy::kFixed, IntervalStrategy::kQuantile}) {
    BinSpec spec;
    spec.interval = strat;
    spec.levels = LevelStrategy::kHierarchy;
    spec.bins = 16;
    auto bins = build_attribute_bins(0, values_of(v), spec);
    ASSERT_EQ(bins.levels.size(), 5u);
    for (std::size_t l = 0; l < bins.levels.size(); ++l) {
      EXPECT_EQ(bins.levels[l].size(), std::size_t{1} << l);
      std::size_t total = 0;
      for (const auto& b : bins.levels[l]) {
        total += b.training_values.size();
        if (l > 0) {
          const auto& parent = bins.levels[l - 1].at(b.parent);
          EXPECT_TRUE(parent.contains(0.5 * (b.lo + b.hi)) ||
                      b.parent == static_cast<int>(bins.levels[l - 1].size()) - 1);
        }
      }
      EXPECT_EQ(total, v.size());
    }
  }
}

TEST(BuildAttributeBins, SparseAttributesReduceB) {
  std::vector<double> v{1, 1, 2, 2, 3};
  BinSpec spec;
  spec.bins = 8;
  auto single = build_attribute_bins(0, values_of(v), spec);
  EXPECT_EQ(single.effective_bins, 3);
  EXPECT_EQ(single.levels[0].size(), 3u);
  spec.levels = LevelStrategy::kOverlapping;
  auto over = build_attribute_bins(0, values_of(v), spec);
  EXPECT_EQ(over.effective_bins, 1);
  spec.levels = LevelStrategy::kHierarchy;
  auto hier = build_attribute_bins(0, values_of(v), spec);
  EXPECT_EQ(hier.effective_bins, 2);
  EXPECT_EQ(hier.levels.size(), 2u);
  spec.levels = LevelStrategy::kSingle;
  spec.bins = 1;
  auto trivial = build_attribute_bins(0, values_of(v), spec);
  EXPECT_EQ(trivial.levels[0].size(), 1u);
}

TEST(AssignBins, ClampsOutOfRange) {
  std::vector<double> v{10, 20, 30, 40};
  BinSpec spec;
  spec.bins = 2;
  auto bins = build_attribute_bins(0, values_of(v), spec);
  EXPECT_EQ(bins.assign(-100)[0].index, 0);
  EXPECT_EQ(bins.assign(1e9)[0].index, 1);
  spec.levels = LevelStrategy::kOverlapping;
  auto over = build_attribute_bins(0, values_of(v), spec);
  EXPECT_EQ(over.assign(-100).size(), 1u);
  EXPECT_EQ(over.assign(1e9).back().index,
            static_cast<int>(over.levels[0].size()) - 1);
}

TEST(BinRepresentative, MedianOrMidpoint) {
  Bin b;
  b.lo = 0;
  b.hi = 10;
  EXPECT_EQ(bin_representative(b), 5);
  b.training_values = {1, 2, 9};
  EXPECT_EQ(bin_representative(b), 2);
  b.training_values = {1, 2, 4, 9};
  EXPECT_EQ(bin_representative(b), 3);
}

TEST(BinSpec, ValidationAndCodes) {
  BinSpec s;
  s.levels = LevelStrategy::kHierarchy;
  s.bins = 6;
  EXPECT_THROW(s.validate(), Error);
  s.bins = 8;
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.code(), "QHC");
  s.levels = LevelStrategy::kOverlapping;
  s.bins = 1;
  EXPECT_THROW(s.validate(), Error);
  s.bins = 0;
  s.levels = LevelStrategy::kSingle;
  EXPECT_THROW(s.validate(), Error);
}

TEST(BinDictionary, JsonRoundTrip) {
  KnowledgeGraph g;
  auto born = g.relations.intern("born");
  auto h = g.relations.intern("height");
  for (int i = 0; i < 30; ++i) {
    auto e = g.entities.intern("e" + std::to_string(i));
    g.numeric_triples.push_back({e, born, 1900.0 + i * 3, ValueKind::kYear});
    g.numeric_triples.push_back({e, h, 1.5 + i * 0.01, ValueKind::kQuantity});
  }
  BinSpec spec;
  spec.levels = LevelStrategy::kHierarchy;
  spec.bins = 4;
  auto dict = build_bin_dictionary(g, spec);
  auto j = to_json(dict, g.relations);
  auto back = bin_dictionary_from_json(j, g.relations);
  EXPECT_EQ(to_json(back, g.relations), j);
  EXPECT_EQ(back.at(born).bin({2, 1}).median, dict.at(born).bin({2, 1}).median);

  auto years_only = build_bin_dictionary(g, spec, {false, true});
  EXPECT_EQ(years_only.size(), 1u);
  EXPECT_NE(years_only.find(born), nullptr);
}

}  // namespace
}  // namespace kga
