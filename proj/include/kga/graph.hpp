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
#pragma once

// Knowledge graphs with numeric literals: vocabularies, triple types, TSV
// ingestion, date normalization and split statistics.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "kga/common.hpp"

namespace kga {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

inline constexpr std::string_view kNextRelation = "kga:next";
inline constexpr std::string_view kParentRelation = "kga:parent";

inline bool is_reserved_relation(std::string_view s) {
  return s == kNextRelation || s == kParentRelation;
}

// Dense string interning. Ids are contiguous from 0 in insertion order.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view s, bool synthetic = false) {
    auto it = index_.find(std::string(s));
    if (it != index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(s);
    synthetic_.push_back(synthetic);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view s) const {
    auto it = index_.find(std::string(s));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view s) const { return find(s).has_value(); }
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  bool is_synthetic(std::uint32_t id) const { return synthetic_.at(id); }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  std::size_t synthetic_count() const {
    return static_cast<std::size_t>(
        std::count(synthetic_.begin(), synthetic_.end(), true));
  }

  std::uint64_t hash() const {
    Fnv1a h;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      h.update(names_[i]);
      const char sep[2] = {'\n', synthetic_[i] ? '1' : '0'};
      h.update(sep, 2);
    }
    return h.digest();
  }

 private:
  std::vector<std::string> names_;
  std::vector<bool> synthetic_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct EntityTriple {
  EntityId subject = 0;
  RelationId relation = 0;
  EntityId object = 0;

  friend bool operator==(const EntityTriple&, const EntityTriple&) = default;
  friend auto operator<=>(const EntityTriple&, const EntityTriple&) = default;
};

struct EntityTripleHash {
  std::size_t operator()(const EntityTriple& t) const {
    std::uint64_t k = (static_cast<std::uint64_t>(t.subject) << 32) ^ t.object;
    return static_cast<std::size_t>(mix_seed(k, t.relation));
  }
};

using TripleSet = std::unordered_set<EntityTriple, EntityTripleHash>;

enum class ValueKind { kQuantity, kYear };

inline std::string_view to_string(ValueKind k) {
  return k == ValueKind::kYear ? "year" : "quantity";
}

struct NumericTriple {
  EntityId entity = 0;
  RelationId attribute = 0;
  double value = 0.0;
  ValueKind kind = ValueKind::kQuantity;

  friend bool operator==(const NumericTriple&, const NumericTriple&) = default;
};

struct KnowledgeGraph {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<EntityTriple> entity_triples;
  std::vector<NumericTriple> numeric_triples;
};

// Returns the year of an ISO-style date (YYYY, YYYY-MM or YYYY-MM-DD).
inline double normalize_date_to_year(std::string_view raw) {
  auto all_digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
      return c >= '0' && c <= '9';
    });
  };
  if (!raw.empty() && raw.front() == '-') {
    throw data_error(fmt::format("non-positive year in date '{}'", raw));
  }
  std::size_t dash = raw.find('-');
  std::string_view year = raw.substr(0, dash);
  if (!all_digits(year) || year.size() > 9) {
    throw data_error(fmt::format("malformed date '{}'", raw));
  }
  if (dash != std::string_view::npos) {
    std::string_view rest = raw.substr(dash + 1);
    std::size_t dash2 = rest.find('-');
    std::string_view month = rest.substr(0, dash2);
    if (month.size() != 2 || !all_digits(month) || month < "01" ||
        month > "12") {
      throw data_error(fmt::format("malformed month in date '{}'", raw));
    }
    if (dash2 != std::string_view::npos) {
      std::string_view day = rest.substr(dash2 + 1);
      if (day.size() != 2 || !all_digits(day) || day < "01" || day > "31") {
        throw data_error(fmt::format("malformed day in date '{}'", raw));
      }
    }
  }
  long long y = 0;
  for (char c : year) y = y * 10 + (c - '0');
  if (y <= 0) {
    throw data_error(fmt::format("non-positive year in date '{}'", raw));
  }
  return static_cast<double>(y);
}

struct ParseCounts {
  std::size_t lines = 0;
  std::size_t duplicates = 0;
  std::size_t dropped_unparseable = 0;
  std::size_t dropped_unseen = 0;
  std::set<std::string> unseen_entities;
  std::set<std::string> unseen_relations;
};

// kIntern grows the vocabularies; kLookup drops triples with unseen names.
enum class VocabMode { kIntern, kLookup };

namespace detail {

template <typename LineFn>
void for_each_line(const std::filesystem::path& path, LineFn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(std::string_view(line), lineno);
  }
}

inline std::optional<std::uint32_t> resolve(Vocabulary& vocab,
                                            std::string_view name,
                                            VocabMode mode) {
  if (mode == VocabMode::kIntern) return vocab.intern(name);
  return vocab.find(name);
}

}  // namespace detail

// Reads a subject/relation/object TSV. Duplicate lines are dropped and
// counted; file order is otherwise preserved.
inline std::vector<EntityTriple> parse_entity_triples(
    const std::filesystem::path& path, Vocabulary& entities,
    Vocabulary& relations, VocabMode mode = VocabMode::kIntern,
    ParseCounts* counts = nullptr) {
  ParseCounts local;
  ParseCounts& c = counts ? *counts : local;
  std::vector<EntityTriple> out;
  TripleSet seen;
  detail::for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    ++c.lines;
    auto cols = split_tabs(line);
    if (cols.size() != 3) {
      throw data_error(fmt::format("{}:{}: expected 3 tab-separated columns, "
                                   "found {}",
                                   path.string(), lineno, cols.size()));
    }
    if (is_reserved_relation(cols[1])) {
      throw data_error(fmt::format("{}:{}: relation '{}' is reserved",
                                   path.string(), lineno, cols[1]));
    }
    auto s = detail::resolve(entities, cols[0], mode);
    auto r = detail::resolve(relations, cols[1], mode);
    auto o = detail::resolve(entities, cols[2], mode);
    if (!s || !r || !o) {
      ++c.dropped_unseen;
      if (!s) c.unseen_entities.emplace(cols[0]);
      if (!o) c.unseen_entities.emplace(cols[2]);
      if (!r) c.unseen_relations.emplace(cols[1]);
      return;
    }
    EntityTriple t{*s, *r, *o};
    if (!seen.insert(t).second) {
      ++c.duplicates;
      return;
    }
    out.push_back(t);
  });
  if (c.lines == 0) {
    throw data_error(fmt::format("'{}' contains no triples", path.string()));
  }
  if (c.duplicates > 0) {
    spdlog::warn("{}: dropped {} duplicate triples", path.string(),
                 c.duplicates);
  }
  if (c.dropped_unseen > 0) {
    spdlog::warn("{}: dropped {} triples with names unseen in training",
                 path.string(), c.dropped_unseen);
  }
  return out;
}

// Accumulates value-form evidence per attribute so that the value kind can
// be decided over every numeric file of a split.
class NumericReader {
 public:
  NumericReader(Vocabulary& entities, Vocabulary& relations)
      : entities_(entities), relations_(relations) {}

  void read(const std::filesystem::path& path,
                                   VocabMode mode,
                                   ParseCounts* counts = nullptr) {
    ParseCounts local;
    ParseCounts& c = counts ? *counts : local;
    if (!std::filesystem::exists(path)) {
      throw data_error(fmt::format("cannot open '{}'", path.string()));
    }
    auto& rows = files_.emplace_back();
    detail::for_each_line(path, [&](std::string_view line,
                                    std::size_t lineno) {
      ++c.lines;
      auto cols = split_tabs(line);
      if (cols.size() != 3) {
        throw data_error(fmt::format("{}:{}: expected 3 tab-separated "
                                     "columns, found {}",
                                     path.string(), lineno, cols.size()));
      }
      if (is_reserved_relation(cols[1])) {
        throw data_error(fmt::format("{}:{}: attribute '{}' is reserved",
                                     path.string(), lineno, cols[1]));
      }
      Form form;
      double value = 0.0;
      if (!classify(cols[2], form, value)) {
        ++c.dropped_unparseable;
        return;
      }
      auto e = detail::resolve(entities_, cols[0], mode);
      auto a = detail::resolve(relations_, cols[1], mode);
      if (!e || !a) {
        ++c.dropped_unseen;
        if (!e) c.unseen_entities.emplace(cols[0]);
        if (!a) c.unseen_relations.emplace(cols[1]);
        return;
      }
      auto& ev = evidence_[*a];
      ev.date |= form == Form::kDate;
      ev.decimal |= form == Form::kDecimal;
      if (ev.date && ev.decimal) {
        throw data_error(fmt::format(
            "{}:{}: attribute '{}' mixes date and decimal values",
            path.string(), lineno, cols[1]));
      }
      rows.push_back({*e, *a, value, ValueKind::kQuantity});
    });
    if (c.dropped_unparseable > 0) {
      spdlog::warn("{}: dropped {} unparseable or non-finite values",
                   path.string(), c.dropped_unparseable);
    }
    if (c.dropped_unseen > 0) {
      spdlog::warn("{}: dropped {} numeric triples with names unseen in "
                   "training",
                   path.string(), c.dropped_unseen);
    }
  }

  // Assigns value kinds: an attribute is a year attribute iff at least one
  // of its values was written as a date.
  std::vector<std::vector<NumericTriple>> finish() {
    for (auto& rows : files_) {
      for (auto& t : rows) {
        auto it = evidence_.find(t.attribute);
        t.kind = (it != evidence_.end() && it->second.date)
                     ? ValueKind::kYear
                     : ValueKind::kQuantity;
      }
    }
    return std::move(files_);
  }

 private:
  // kBareYear (exactly four digits) is compatible with either kind.
  enum class Form { kDate, kDecimal, kBareYear };
  struct Evidence {
    bool date = false;
    bool decimal = false;
  };

  static bool classify(std::string_view raw, Form& form, double& value) {
    bool digits_only = !raw.empty() &&
                       std::all_of(raw.begin(), raw.end(), [](char ch) {
                         return ch >= '0' && ch <= '9';
                       });
    if (digits_only && raw.size() == 4) {
      form = Form::kBareYear;
      try {
        value = normalize_date_to_year(raw);
      } catch (const Error&) {
        return false;
      }
      return true;
    }
    std::size_t dash = raw.find('-', 1);
    bool date_shaped = dash != std::string_view::npos && raw.front() != '-' &&
                       raw.find_first_of(".eE") == std::string_view::npos;
    if (date_shaped) {
      try {
        value = normalize_date_to_year(raw);
      } catch (const Error&) {
        return false;
      }
      form = Form::kDate;
      return true;
    }
    form = Form::kDecimal;
    return parse_double(raw, value) && std::isfinite(value);
  }

  Vocabulary& entities_;
  Vocabulary& relations_;
  std::vector<std::vector<NumericTriple>> files_;
  std::map<RelationId, Evidence> evidence_;
};

// Reads an entity/attribute/value TSV on its own.
inline std::vector<NumericTriple> parse_numeric_triples(
    const std::filesystem::path& path, Vocabulary& entities,
    Vocabulary& relations, VocabMode mode = VocabMode::kIntern,
    ParseCounts* counts = nullptr) {
  NumericReader reader(entities, relations);
  reader.read(path, mode, counts);
  return std::move(reader.finish().front());
}

struct SplitPaths {
  std::filesystem::path train;
  std::filesystem::path valid;
  std::filesystem::path test;
  std::filesystem::path numeric_train;
  std::filesystem::path numeric_valid;
  std::filesystem::path numeric_test;
};

struct DatasetSplit {
  KnowledgeGraph train;
  std::vector<EntityTriple> valid;
  std::vector<EntityTriple> test;
  std::vector<NumericTriple> valid_numeric;
  std::vector<NumericTriple> test_numeric;

  // Bookkeeping for statistics over the raw files.
  std::size_t dropped_entity_triples = 0;
  std::size_t dropped_numeric_triples = 0;
  std::set<std::string> unseen_entities;
  std::set<std::string> unseen_relations;
};

// Loads a split. Valid/test names must already exist in training; triples
// that reference unseen names or repeat a training triple are dropped.
inline DatasetSplit load_split(const SplitPaths& paths) {
  DatasetSplit split;
  auto& g = split.train;
  if (paths.train.empty()) throw usage_error("no training triples given");
  g.entity_triples = parse_entity_triples(paths.train, g.entities, g.relations);

  NumericReader numeric(g.entities, g.relations);
  ParseCounts ntrain, nvalid, ntest;
  if (!paths.numeric_train.empty()) {
    numeric.read(paths.numeric_train, VocabMode::kIntern, &ntrain);
  }
  std::size_t valid_slot = 0, test_slot = 0;
  std::size_t slots = paths.numeric_train.empty() ? 0 : 1;
  if (!paths.numeric_valid.empty()) {
    numeric.read(paths.numeric_valid, VocabMode::kLookup, &nvalid);
    valid_slot = ++slots;
  }
  if (!paths.numeric_test.empty()) {
    numeric.read(paths.numeric_test, VocabMode::kLookup, &ntest);
    test_slot = ++slots;
  }
  auto files = numeric.finish();
  if (!paths.numeric_train.empty()) g.numeric_triples = std::move(files[0]);
  if (valid_slot) split.valid_numeric = std::move(files[valid_slot - 1]);
  if (test_slot) split.test_numeric = std::move(files[test_slot - 1]);

  TripleSet train_set(g.entity_triples.begin(), g.entity_triples.end());
  auto load_eval = [&](const std::filesystem::path& p) {
    std::vector<EntityTriple> out;
    if (p.empty()) return out;
    ParseCounts c;
    auto raw = parse_entity_triples(p, g.entities, g.relations,
                                    VocabMode::kLookup, &c);
    split.dropped_entity_triples += c.dropped_unseen;
    split.unseen_entities.insert(c.unseen_entities.begin(),
                                 c.unseen_entities.end());
    split.unseen_relations.insert(c.unseen_relations.begin(),
                                  c.unseen_relations.end());
    std::size_t overlap = 0;
    for (const auto& t : raw) {
      if (train_set.insert(t).second) {
        out.push_back(t);
      } else {
        ++overlap;
      }
    }
    if (overlap > 0) {
      spdlog::warn("{}: dropped {} triples already present in an earlier "
                   "split",
                   p.string(), overlap);
    }
    return out;
  };
  split.valid = load_eval(paths.valid);
  split.test = load_eval(paths.test);
  for (const auto* c : {&nvalid, &ntest}) {
    split.dropped_numeric_triples += c->dropped_unseen;
    split.unseen_entities.insert(c->unseen_entities.begin(),
                                 c->unseen_entities.end());
  }
  return split;
}

struct GraphStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t entity_triples = 0;
  std::size_t attributes = 0;
  std::size_t numeric_triples = 0;

  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

// Counts over train+valid+test, including triples the loader dropped for
// referencing names unseen in training.
inline GraphStats graph_stats(const DatasetSplit& split) {
  GraphStats s;
  const auto& g = split.train;
  s.entities = g.entities.size() - g.entities.synthetic_count() +
               split.unseen_entities.size();
  std::set<RelationId> relations, attributes;
  for (const auto* list : {&g.entity_triples, &split.valid, &split.test}) {
    for (const auto& t : *list) relations.insert(t.relation);
  }
  for (const auto* list :
       {&g.numeric_triples, &split.valid_numeric, &split.test_numeric}) {
    for (const auto& t : *list) attributes.insert(t.attribute);
  }
  s.relations = relations.size() + split.unseen_relations.size();
  s.attributes = attributes.size();
  s.entity_triples = g.entity_triples.size() + split.valid.size() +
                     split.test.size() + split.dropped_entity_triples;
  s.numeric_triples = g.numeric_triples.size() + split.valid_numeric.size() +
                      split.test_numeric.size() +
                      split.dropped_numeric_triples;
  return s;
}

inline nlohmann::ordered_json to_json(const GraphStats& s) {
  nlohmann::ordered_json j;
  j["entities"] = s.entities;
  j["relations"] = s.relations;
  j["entity_triples"] = s.entity_triples;
  j["attributes"] = s.attributes;
  j["numeric_triples"] = s.numeric_triples;
  return j;
}

}  // namespace kga
