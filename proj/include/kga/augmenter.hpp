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

// Graph augmentation: bins become entities, numeric triples (e, a, v) are
// replaced by (e, a, bin) for every bin in B(v), and bins are linked to
// their neighbours (kga:next) and to their coarser parent (kga:parent).

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kga/common.hpp"
#include "kga/discretizer.hpp"
#include "kga/graph.hpp"

namespace kga {

inline std::string bin_entity_name(std::string_view attribute, const Bin& b) {
  return fmt::format("{}::L{}::B{}::[{},{}{}", attribute, b.level, b.index,
                     format_number(b.lo), format_number(b.hi),
                     b.closed ? ']' : ')');
}

class BinEntityRegistry {
 public:
  void add(RelationId attribute, std::vector<std::vector<EntityId>> ids) {
    ids_[attribute] = std::move(ids);
  }
  EntityId entity(RelationId attribute, BinRef r) const {
    return ids_.at(attribute).at(r.level).at(r.index);
  }
  const std::vector<std::vector<EntityId>>& levels(RelationId attribute) const {
    return ids_.at(attribute);
  }
  bool contains(RelationId attribute) const { return ids_.count(attribute); }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [a, levels] : ids_) {
      for (const auto& l : levels) n += l.size();
    }
    return n;
  }

 private:
  std::map<RelationId, std::vector<std::vector<EntityId>>> ids_;
};

// Appends one synthetic entity per bin, attributes in id order and bins in
// (level, index) order.
inline BinEntityRegistry register_bin_entities(const BinDictionary& dict,
                                               Vocabulary& entities,
                                               const Vocabulary& relations) {
  BinEntityRegistry registry;
  for (const auto& [a, bins] : dict.attributes()) {
    std::vector<std::vector<EntityId>> ids;
    for (const auto& level : bins.levels) {
      auto& row = ids.emplace_back();
      for (const auto& b : level) {
        auto name = bin_entity_name(relations.name(a), b);
        if (entities.contains(name)) {
          throw data_error(fmt::format(
              "bin entity '{}' collides with an existing entity", name));
        }
        row.push_back(entities.intern(name, /*synthetic=*/true));
      }
    }
    registry.add(a, std::move(ids));
  }
  return registry;
}

inline std::vector<EntityTriple> chain_bins_horizontal(
    std::span<const EntityId> level, RelationId next) {
  std::vector<EntityTriple> out;
  for (std::size_t i = 0; i + 1 < level.size(); ++i) {
    out.push_back({level[i], next, level[i + 1]});
  }
  return out;
}

// One (child, kga:parent, parent) triple per bin below level 0.
inline std::vector<EntityTriple> chain_bins_vertical(
    const AttributeBins& bins, const BinEntityRegistry& registry,
    RelationId parent) {
  std::vector<EntityTriple> out;
  if (bins.overlapping()) return out;
  for (std::size_t l = 1; l < bins.levels.size(); ++l) {
    for (const auto& b : bins.levels[l]) {
      out.push_back(
          {registry.entity(bins.attribute, {static_cast<int>(l), b.index}),
           parent,
           registry.entity(bins.attribute,
                           {static_cast<int>(l) - 1, b.parent})});
    }
  }
  return out;
}

inline std::vector<EntityTriple> replace_numeric_triples(
    std::span<const NumericTriple> numeric, const BinDictionary& dict,
    const BinEntityRegistry& registry) {
  std::vector<EntityTriple> out;
  for (const auto& t : numeric) {
    const AttributeBins* bins = dict.find(t.attribute);
    if (!bins || !registry.contains(t.attribute)) {
      throw data_error(
          fmt::format("attribute {} has no bin dictionary", t.attribute));
    }
    for (BinRef r : bins->assign(t.value)) {
      out.push_back({t.entity, t.attribute, registry.entity(t.attribute, r)});
    }
  }
  return out;
}

struct AugmentedGraph {
  Vocabulary entities;   // originals first, then bin entities
  Vocabulary relations;  // originals first, then reserved links
  std::vector<EntityTriple> base;
  std::vector<EntityTriple> assignments;
  std::vector<EntityTriple> structural;
  BinEntityRegistry registry;
  BinDictionary bins;
  std::optional<RelationId> next_relation;
  std::optional<RelationId> parent_relation;

  std::vector<EntityTriple> training_triples() const {
    std::vector<EntityTriple> out;
    out.reserve(base.size() + assignments.size() + structural.size());
    out.insert(out.end(), base.begin(), base.end());
    out.insert(out.end(), assignments.begin(), assignments.end());
    out.insert(out.end(), structural.begin(), structural.end());
    return out;
  }
};

// Builds G' from the training graph. Numeric triples of kinds excluded by
// the filter are dropped rather than augmented.
inline AugmentedGraph augment(const KnowledgeGraph& g, const BinSpec& spec,
                              KindFilter kinds = {}) {
  if (g.entities.synthetic_count() > 0) {
    throw data_error("graph already contains bin entities");
  }
  AugmentedGraph out;
  out.entities = g.entities;
  out.relations = g.relations;
  out.base = g.entity_triples;
  out.bins = build_bin_dictionary(g, spec, kinds);
  if (out.bins.empty()) return out;

  out.registry = register_bin_entities(out.bins, out.entities, out.relations);
  if (spec.chaining) out.next_relation = out.relations.intern(kNextRelation);
  if (spec.levels == LevelStrategy::kHierarchy) {
    out.parent_relation = out.relations.intern(kParentRelation);
  }

  std::vector<NumericTriple> kept;
  for (const auto& t : g.numeric_triples) {
    if (out.bins.find(t.attribute)) kept.push_back(t);
  }
  out.assignments = replace_numeric_triples(kept, out.bins, out.registry);

  for (const auto& [a, bins] : out.bins.attributes()) {
    if (out.next_relation) {
      for (const auto& ids : out.registry.levels(a)) {
        auto chain = chain_bins_horizontal(ids, *out.next_relation);
        out.structural.insert(out.structural.end(), chain.begin(), chain.end());
      }
    }
    if (out.parent_relation) {
      auto up = chain_bins_vertical(bins, out.registry, *out.parent_relation);
      out.structural.insert(out.structural.end(), up.begin(), up.end());
    }
  }
  return out;
}

inline void write_triples_tsv(const std::filesystem::path& path,
                              std::span<const EntityTriple> triples,
                              const Vocabulary& entities,
                              const Vocabulary& relations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error(fmt::format("cannot write '{}'", path.string()));
  for (const auto& t : triples) {
    out << entities.name(t.subject) << '\t' << relations.name(t.relation)
        << '\t' << entities.name(t.object) << '\n';
  }
}

}  // namespace kga
