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

#include "kga/graph.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace kga {
namespace {

using testing::TempDir;
using testing::write_file;

TEST(Vocabulary, InternIsStableAndDense) {
  Vocabulary v;
  EXPECT_EQ(v.intern("a"), 0u);
  EXPECT_EQ(v.intern("b"), 1u);
  EXPECT_EQ(v.intern("a"), 0u);
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.name(1), "b");
  EXPECT_FALSE(v.find("c").has_value());
  v.intern("bin", true);
  EXPECT_TRUE(v.is_synthetic(2));
  EXPECT_EQ(v.synthetic_count(), 1u);
}

TEST(Vocabulary, HashDependsOnOrderAndFlags) {
  Vocabulary a, b, c;
  a.intern("x");
  a.intern("y");
  b.intern("y");
  b.intern("x");
  c.intern("x");
  c.intern("y", true);
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  Vocabulary a2;
  a2.intern("x");
  a2.intern("y");
  EXPECT_EQ(a.hash(), a2.hash());
}

TEST(NormalizeDate, AcceptedForms) {
  EXPECT_EQ(normalize_date_to_year("1961"), 1961);
  EXPECT_EQ(normalize_date_to_year("1961-07"), 1961);
  EXPECT_EQ(normalize_date_to_year("1961-07-04"), 1961);
}

TEST(NormalizeDate, Rejections) {
  EXPECT_THROW(normalize_date_to_year("-0044-03-15"), Error);
  EXPECT_THROW(normalize_date_to_year("0000"), Error);
  EXPECT_THROW(normalize_date_to_year("1961-13-01"), Error);
  EXPECT_THROW(normalize_date_to_year("1961-07-32"), Error);
  EXPECT_THROW(normalize_date_to_year("19x1"), Error);
}

TEST(ParseEntityTriples, PreservesOrderAndCountsDuplicates) {
  TempDir dir;
  auto p = write_file(dir / "t.tsv", "a\tr\tb\nb\tr\tc\na\tr\tb\n");
  Vocabulary e, r;
  ParseCounts c;
  auto t = parse_entity_triples(p, e, r, VocabMode::kIntern, &c);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(c.duplicates, 1u);
  EXPECT_EQ(c.lines, 3u);
  EXPECT_EQ(e.name(t[0].subject), "a");
  EXPECT_EQ(e.name(t[1].object), "c");
  EXPECT_EQ(e.size(), 3u);
}

TEST(ParseEntityTriples, MalformedLineNamesLine) {
  TempDir dir;
  auto p = write_file(dir / "t.tsv", "a\tr\tb\na\tr\n");
  Vocabulary e, r;
  try {
    parse_entity_triples(p, e, r);
    FAIL() << "expected an error";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(err.what()).find(":2:"), std::string::npos);
  }
}

TEST(ParseEntityTriples, ReservedRelationAndEmptyFile) {
  TempDir dir;
  Vocabulary e, r;
  auto reserved = write_file(dir / "r.tsv", "a\tkga:next\tb\n");
  EXPECT_THROW(parse_entity_triples(reserved, e, r), Error);
  auto empty = write_file(dir / "e.tsv", "");
  EXPECT_THROW(parse_entity_triples(empty, e, r), Error);
  EXPECT_THROW(parse_entity_triples(dir / "missing.tsv", e, r), Error);
}

TEST(ParseEntityTriples, LookupModeDropsUnseen) {
  TempDir dir;
  Vocabulary e, r;
  e.intern("a");
  e.intern("b");
  r.intern("r");
  auto p = write_file(dir / "t.tsv", "a\tr\tb\na\tr\tz\na\tq\tb\n");
  ParseCounts c;
  auto t = parse_entity_triples(p, e, r, VocabMode::kLookup, &c);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(c.dropped_unseen, 2u);
  EXPECT_EQ(c.unseen_entities, std::set<std::string>{"z"});
  EXPECT_EQ(c.unseen_relations, std::set<std::string>{"q"});
  EXPECT_EQ(e.size(), 2u);
}

TEST(ParseNumericTriples, KindsFromValueForms) {
  TempDir dir;
  auto p = write_file(dir / "n.tsv",
                      "a\tborn\t1961-07-04\n"
                      "b\tborn\t1935\n"
                      "a\theight\t1.85\n"
                      "b\theight\t2000\n"
                      "c\tpop\t1e6\n"
                      "c\tpop\tnot-a-number\n");
  Vocabulary e, r;
  ParseCounts c;
  auto t = parse_numeric_triples(p, e, r, VocabMode::kIntern, &c);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(c.dropped_unparseable, 1u);
  for (const auto& x : t) {
    const auto& attr = r.name(x.attribute);
    EXPECT_EQ(x.kind, attr == "born" ? ValueKind::kYear : ValueKind::kQuantity)
        << attr;
  }
  EXPECT_EQ(t[0].value, 1961);
  EXPECT_EQ(t[1].value, 1935);
  EXPECT_EQ(t[4].value, 1e6);
}

TEST(ParseNumericTriples, MixedDateAndDecimalIsError) {
  TempDir dir;
  auto p = write_file(dir / "n.tsv", "a\tx\t1961-07-04\nb\tx\t3.5\n");
  Vocabulary e, r;
  EXPECT_THROW(parse_numeric_triples(p, e, r), Error);
}

SplitPaths write_split(const TempDir& dir) {
  SplitPaths p;
  p.train = write_file(dir / "train.tsv", "a\tr\tb\nb\tr\tc\nc\ts\ta\n");
  p.valid = write_file(dir / "valid.tsv", "a\tr\tc\na\tr\tb\nz\tr\ta\n");
  p.test = write_file(dir / "test.tsv", "b\ts\ta\na\tr\tc\nc\tq\ta\n");
  p.numeric_train =
      write_file(dir / "ntrain.tsv", "a\tborn\t1900\nb\tborn\t1950-01-01\n");
  p.numeric_test = write_file(dir / "ntest.tsv", "c\tborn\t1960\nz\tborn\t1970\n");
  return p;
}

TEST(LoadSplit, DropsUnseenAndCrossSplitDuplicates) {
  TempDir dir;
  auto split = load_split(write_split(dir));
  EXPECT_EQ(split.train.entity_triples.size(), 3u);
  // (a r b) repeats training; (z r a) has an unseen entity.
  EXPECT_EQ(split.valid.size(), 1u);
  // (a r c) repeats valid; (c q a) has an unseen relation.
  EXPECT_EQ(split.test.size(), 1u);
  EXPECT_EQ(split.test_numeric.size(), 1u);
  EXPECT_EQ(split.test_numeric[0].kind, ValueKind::kYear);
  EXPECT_EQ(split.unseen_entities, std::set<std::string>{"z"});
  EXPECT_EQ(split.unseen_relations, std::set<std::string>{"q"});
}

TEST(GraphStats, CountsEverySplit) {
  TempDir dir;
  auto s = graph_stats(load_split(write_split(dir)));
  EXPECT_EQ(s.entities, 4u);        // a b c + unseen z
  EXPECT_EQ(s.relations, 3u);       // r s + unseen q
  EXPECT_EQ(s.entity_triples, 7u);  // 3 + 1 + 1 kept, 2 unseen dropped
  EXPECT_EQ(s.attributes, 1u);
  EXPECT_EQ(s.numeric_triples, 4u);
}

}  // namespace
}  // namespace kga
