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

#include "kga/augmenter.hpp"

#include <gtest/gtest.h>

namespace kga {
namespace {

KnowledgeGraph toy_graph() {
  KnowledgeGraph g;
  auto r = g.relations.intern("knows");
  auto born = g.relations.intern("born");
  auto pop = g.relations.intern("height");
  const double years[] = {1700, 1850, 1900, 1930, 1950, 1961, 1970, 1990};
  for (int i = 0; i < 8; ++i) {
    auto e = g.entities.intern("e" + std::to_string(i));
    g.numeric_triples.push_back({e, born, years[i], ValueKind::kYear});
    g.numeric_triples.push_back({e, pop, 1.0 + i, ValueKind::kQuantity});
  }
  for (int i = 0; i + 1 < 8; ++i) g.entity_triples.push_back({EntityId(i), r, EntityId(i + 1)});
  return g;
}

std::size_t count_relation(const std::vector<EntityTriple>& ts, RelationId r) {
  return static_cast<std::size_t>(std::count_if(
      ts.begin(), ts.end(), [&](const EntityTriple& t) { return t.relation == r; }));
}

TEST(BinEntityName, Format) {
  Bin b;
  b.level = 2;
  b.index = 3;
  b.lo = 1935;
  b.hi = 1966;
  EXPECT_EQ(bin_entity_name("born", b), "born::L2::B3::[1935,1966)");
  b.closed = true;
  b.hi = 2021.5;
  EXPECT_EQ(bin_entity_name("born", b), "born::L2::B3::[1935,2021.5]");
}

TEST(Augment, SingleChained) {
  auto g = toy_graph();
  BinSpec spec;
  spec.bins = 4;
  auto a = augment(g, spec);
  // Two attributes, four bins each.
  EXPECT_EQ(a.entities.size(), 8u + 8u);
  EXPECT_EQ(a.entities.synthetic_count(), 8u);
  EXPECT_EQ(a.base.size(), g.entity_triples.size());
  EXPECT_EQ(a.assignments.size(), g.numeric_triples.size());
  ASSERT_TRUE(a.next_relation.has_value());
  EXPECT_FALSE(a.parent_relation.has_value());
  EXPECT_EQ(count_relation(a.structural, *a.next_relation), 2u * 3u);
  // Each assignment points at the bin containing the value.
  for (const auto& t : a.assignments) {
    EXPECT_TRUE(a.entities.is_synthetic(t.object));
    EXPECT_FALSE(a.entities.is_synthetic(t.subject));
  }
}

TEST(Augment, OverlappingAssignsOneOrTwo) {
  auto g = toy_graph();
  BinSpec spec;
  spec.levels = LevelStrategy::kOverlapping;
  spec.bins = 2;
  spec.chaining = false;
  auto a = augment(g, spec);
  EXPECT_FALSE(a.next_relation.has_value());
  EXPECT_TRUE(a.structural.empty());
  EXPECT_GE(a.assignments.size(), g.numeric_triples.size());
  EXPECT_LE(a.assignments.size(), 2 * g.numeric_triples.size());
  EXPECT_EQ(a.entities.synthetic_count(), 2u * 3u);
}

TEST(Augment, HierarchyAddsParentLinks) {
  auto g = toy_graph();
  BinSpec spec;
  spec.levels = LevelStrategy::kHierarchy;
  spec.bins = 4;
  spec.chaining = false;
  auto a = augment(g, spec);
  ASSERT_TRUE(a.parent_relation.has_value());
  // Levels 1 + 2 + 4 per attribute; one parent link per non-root bin.
  EXPECT_EQ(a.entities.synthetic_count(), 2u * 7u);
  EXPECT_EQ(count_relation(a.structural, *a.parent_relation), 2u * 6u);
  // One assignment per level.
  EXPECT_EQ(a.assignments.size(), 3 * g.numeric_triples.size());
  spec.chaining = true;
  auto c = augment(g, spec);
  EXPECT_EQ(count_relation(c.structural, *c.next_relation), 2u * (0 + 1 + 3));
}

TEST(Augment, KindFilterDropsExcluded) {
  auto g = toy_graph();
  BinSpec spec;
  spec.bins = 2;
  auto years = augment(g, spec, {false, true});
  EXPECT_EQ(years.bins.size(), 1u);
  EXPECT_EQ(years.assignments.size(), 8u);
  auto qty = augment(g, spec, {true, false});
  EXPECT_EQ(qty.bins.size(), 1u);
  EXPECT_EQ(qty.relations.name(qty.assignments[0].relation), "height");
}

TEST(Augment, NoLiteralsPassThrough) {
  auto g = toy_graph();
  g.numeric_triples.clear();
  auto a = augment(g, BinSpec{});
  EXPECT_EQ(a.training_triples(), g.entity_triples);
  EXPECT_EQ(a.entities.size(), g.entities.size());
  EXPECT_EQ(a.relations.size(), g.relations.size());
}

TEST(Augment, RejectsAugmentedInputAndCollisions) {
  auto g = toy_graph();
  auto a = augment(g, BinSpec{});
  KnowledgeGraph again;
  again.entities = a.entities;
  again.relations = a.relations;
  EXPECT_THROW(augment(again, BinSpec{}), Error);

  auto clash = toy_graph();
  BinSpec spec;
  spec.bins = 1;
  auto first = augment(clash, spec);
  clash.entities.intern(first.entities.name(8));
  EXPECT_THROW(augment(clash, spec), Error);
}

}  // namespace
}  // namespace kga
