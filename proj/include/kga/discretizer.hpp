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

// Per-attribute discretization of numeric values into bins.
//
// Interval strategies: fixed (equal width) and quantile (equal frequency).
// Level strategies: single (one disjoint level), overlapping (2b-1 bins
// from pairwise-merged neighbours of 2b auxiliary bins) and hierarchy
// (levels of 1, b, b^2, ... bins).
//
// Intervals are half-open [lo, hi) except the last bin of a level, which is
// closed so that the attribute maximum is covered.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kga/common.hpp"
#include "kga/graph.hpp"

namespace kga {

enum class IntervalStrategy { kFixed, kQuantile };
enum class LevelStrategy { kSingle, kOverlapping, kHierarchy };

inline std::string_view to_string(IntervalStrategy s) {
  return s == IntervalStrategy::kFixed ? "fixed" : "quantile";
}

inline std::string_view to_string(LevelStrategy s) {
  switch (s) {
    case LevelStrategy::kSingle:
      return "single";
    case LevelStrategy::kOverlapping:
      return "overlapping";
    case LevelStrategy::kHierarchy:
      return "hierarchy";
  }
  return "?";
}

inline IntervalStrategy parse_interval_strategy(std::string_view s) {
  if (s == "fixed" || s == "F") return IntervalStrategy::kFixed;
  if (s == "quantile" || s == "Q") return IntervalStrategy::kQuantile;
  throw usage_error(fmt::format("unknown interval strategy '{}'", s));
}

inline LevelStrategy parse_level_strategy(std::string_view s) {
  if (s == "single" || s == "S") return LevelStrategy::kSingle;
  if (s == "overlapping" || s == "O") return LevelStrategy::kOverlapping;
  if (s == "hierarchy" || s == "H") return LevelStrategy::kHierarchy;
  throw usage_error(fmt::format("unknown level strategy '{}'", s));
}

struct BinSpec {
  IntervalStrategy interval = IntervalStrategy::kQuantile;
  LevelStrategy levels = LevelStrategy::kSingle;
  // Single/overlapping: b. Hierarchy: bin count of the finest level.
  int bins = 8;
  // Hierarchy branching factor.
  int branching = 2;
  bool chaining = true;

  void validate() const {
    if (bins < 1) throw usage_error("bin count must be positive");
    if (levels == LevelStrategy::kOverlapping && bins < 2) {
      throw usage_error("overlapping bins need b >= 2");
    }
    if (levels == LevelStrategy::kHierarchy) {
      if (branching < 2) throw usage_error("hierarchy branching must be >= 2");
      long long n = 1;
      while (n < bins) n *= branching;
      if (n != bins) {
        throw usage_error(fmt::format(
            "hierarchy leaf count {} is not a power of {}", bins, branching));
      }
    }
  }

  // Variant code such as "QHC": interval, levels, chaining.
  std::string code() const {
    std::string c;
    c += interval == IntervalStrategy::kFixed ? 'F' : 'Q';
    c += "SOH"[static_cast<int>(levels)];
    c += chaining ? 'C' : 'N';
    return c;
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool closed = false;

  bool contains(double v) const {
    return v >= lo && (v < hi || (closed && v == hi));
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Turns n+1 cut points into n contiguous intervals, the last one closed.
inline std::vector<Interval> intervals_from_cuts(std::span<const double> cuts) {
  std::vector<Interval> out;
  if (cuts.size() < 2) return out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    out.push_back({cuts[i], cuts[i + 1], i + 2 == cuts.size()});
  }
  return out;
}

// Equal-width intervals: bin i is [z- + i*k, z- + (i+1)*k) with
// k = (z+ - z-) / b. A zero-width range yields the single bin [z-, z+].
inline std::vector<Interval> fixed_intervals(double zmin, double zmax, int b) {
  if (b < 1) throw usage_error("bin count must be positive");
  if (!(zmin <= zmax)) throw data_error("fixed_intervals: z- > z+");
  if (zmin == zmax) return {{zmin, zmax, true}};
  const double k = (zmax - zmin) / b;
  std::vector<double> cuts(b + 1);
  for (int i = 0; i < b; ++i) cuts[i] = zmin + i * k;
  cuts[b] = zmax;
  return intervals_from_cuts(cuts);
}

inline std::size_t count_distinct(std::span<const double> sorted) {
  if (sorted.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1]) ++n;
  }
  return n;
}

// Equal-frequency intervals over ascending values. The i-th cut goes
// before position ceil(i*N/b); when that would split a run of equal values
// the cut moves to the nearest run boundary that still leaves room for the
// remaining cuts. Fewer distinct values than b yields one bin per distinct
// value.
inline std::vector<Interval> quantile_intervals(std::span<const double> sorted,
                                                int b) {
  if (sorted.empty()) throw data_error("quantile_intervals: no values");
  if (b < 1) throw usage_error("bin count must be positive");
  const std::size_t n = sorted.size();
  std::vector<std::size_t> run_starts;
  for (std::size_t p = 1; p < n; ++p) {
    if (sorted[p - 1] < sorted[p]) run_starts.push_back(p);
  }
  const std::size_t bins =
      std::min<std::size_t>(static_cast<std::size_t>(b), run_starts.size() + 1);
  if (bins == 1) return {{sorted.front(), sorted.back(), true}};

  std::vector<double> cuts{sorted.front()};
  std::size_t next = 0;
  for (std::size_t i = 1; i < bins; ++i) {
    const std::size_t ideal = (i * n + bins - 1) / bins;
    const std::size_t last = run_starts.size() - (bins - 1 - i);
    auto first_it = run_starts.begin() + static_cast<std::ptrdiff_t>(next);
    auto last_it = run_starts.begin() + static_cast<std::ptrdiff_t>(last);
    auto it = std::lower_bound(first_it, last_it, ideal);
    if (it == last_it) {
      --it;
    } else if (it != first_it && *it != ideal &&
               ideal - *(it - 1) <= *it - ideal) {
      --it;
    }
    cuts.push_back(sorted[*it]);
    next = static_cast<std::size_t>(it - run_starts.begin()) + 1;
  }
  cuts.push_back(sorted.back());
  return intervals_from_cuts(cuts);
}

struct AttributeValues {
  std::vector<double> values;  // ascending, duplicates kept
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

inline AttributeValues collect_attribute_values(const KnowledgeGraph& g,
                                                RelationId attribute) {
  AttributeValues out;
  for (const auto& t : g.numeric_triples) {
    if (t.attribute == attribute) out.values.push_back(t.value);
  }
  if (out.values.empty()) {
    throw data_error(fmt::format("attribute '{}' has no numeric values",
                                 attribute < g.relations.size()
                                     ? g.relations.name(attribute)
                                     : std::to_string(attribute)));
  }
  std::sort(out.values.begin(), out.values.end());
  out.min = out.values.front();
  out.max = out.values.back();
  out.count = out.values.size();
  return out;
}

struct Bin {
  RelationId attribute = 0;
  int level = 0;
  int index = 0;
  double lo = 0.0;
  double hi = 0.0;
  bool closed = false;
  int parent = -1;  // index in level-1 for hierarchy levels >= 1
  std::vector<double> training_values;  // ascending
  // Mirrors training_values when present; survives serialization.
  std::size_t count = 0;
  double median = 0.0;

  Interval interval() const { return {lo, hi, closed}; }
  bool contains(double v) const { return interval().contains(v); }
};

inline double median_of_sorted(std::span<const double> v) {
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median of the bin's training values; the interval midpoint for an empty
// bin.
inline double bin_representative(const Bin& bin) {
  if (!bin.training_values.empty()) return median_of_sorted(bin.training_values);
  if (bin.count > 0) return bin.median;
  return 0.5 * (bin.lo + bin.hi);
}

using BinLevel = std::vector<Bin>;

inline BinLevel make_single_bins(RelationId attribute,
                                 std::span<const Interval> intervals,
                                 int level = 0) {
  BinLevel out;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    Bin b;
    b.attribute = attribute;
    b.level = level;
    b.index = static_cast<int>(i);
    b.lo = intervals[i].lo;
    b.hi = intervals[i].hi;
    b.closed = intervals[i].closed;
    out.push_back(std::move(b));
  }
  return out;
}

// Merges neighbouring auxiliary bins j and j+1 into overlapping bin j.
inline BinLevel make_overlapping_bins(RelationId attribute,
                                      std::span<const Interval> auxiliary) {
  if (auxiliary.size() < 2) return make_single_bins(attribute, auxiliary);
  std::vector<Interval> merged;
  for (std::size_t j = 0; j + 1 < auxiliary.size(); ++j) {
    merged.push_back(
        {auxiliary[j].lo, auxiliary[j + 1].hi, auxiliary[j + 1].closed});
  }
  return make_single_bins(attribute, merged);
}

// Index of the bin of a disjoint level containing v; out-of-range values
// clamp to the first or last bin.
inline int locate_in_disjoint_level(const BinLevel& level, double v) {
  auto it = std::upper_bound(level.begin(), level.end(), v,
                             [](double x, const Bin& b) { return x < b.lo; });
  if (it == level.begin()) return 0;
  return static_cast<int>(it - level.begin()) - 1;
}

// Builds levels 0..L from per-level intervals and links each bin to the
// coarser bin containing its midpoint.
inline std::vector<BinLevel> make_hierarchy_bins(
    RelationId attribute, const std::vector<std::vector<Interval>>& levels) {
  std::vector<BinLevel> out;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    auto level = make_single_bins(attribute, levels[l], static_cast<int>(l));
    if (l > 0) {
      for (auto& b : level) {
        b.parent = locate_in_disjoint_level(out.back(), 0.5 * (b.lo + b.hi));
      }
    }
    out.push_back(std::move(level));
  }
  return out;
}

// Coarsens leaf cut points into a hierarchy by keeping every
// branching^(L-l)-th cut at level l.
inline std::vector<std::vector<Interval>> hierarchy_from_leaf_cuts(
    std::span<const double> leaf_cuts, int branching) {
  const std::size_t leaves = leaf_cuts.size() - 1;
  std::vector<std::size_t> sizes{leaves};
  while (sizes.back() > 1) {
    if (sizes.back() % branching != 0) {
      throw usage_error("leaf count is not a power of the branching factor");
    }
    sizes.push_back(sizes.back() / branching);
  }
  std::vector<std::vector<Interval>> levels;
  for (auto it = sizes.rbegin(); it != sizes.rend(); ++it) {
    std::size_t step = leaves / *it;
    std::vector<double> cuts;
    for (std::size_t i = 0; i <= leaves; i += step) cuts.push_back(leaf_cuts[i]);
    levels.push_back(intervals_from_cuts(cuts));
  }
  return levels;
}

struct BinRef {
  int level = 0;
  int index = 0;
  friend bool operator==(const BinRef&, const BinRef&) = default;
  friend auto operator<=>(const BinRef&, const BinRef&) = default;
};

struct AttributeBins {
  RelationId attribute = 0;
  ValueKind kind = ValueKind::kQuantity;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  BinSpec spec;            // as requested
  int effective_bins = 0;  // b after reduction for sparse attributes
  std::vector<BinLevel> levels;

  bool overlapping() const {
    return spec.levels == LevelStrategy::kOverlapping;
  }

  // B(v): one bin per disjoint level; one or two bins for overlapping.
  std::vector<BinRef> assign(double v) const {
    std::vector<BinRef> out;
    if (!overlapping()) {
      for (std::size_t l = 0; l < levels.size(); ++l) {
        out.push_back(
            {static_cast<int>(l), locate_in_disjoint_level(levels[l], v)});
      }
      return out;
    }
    const auto& level = levels.front();
    for (const auto& b : level) {
      if (b.contains(v)) out.push_back({0, b.index});
    }
    if (out.empty()) {
      out.push_back({0, v < level.front().lo
                            ? 0
                            : static_cast<int>(level.size()) - 1});
    }
    return out;
  }

  const Bin& bin(BinRef r) const { return levels.at(r.level).at(r.index); }

  // Candidate bins for numeric prediction: the finest level.
  int prediction_level() const { return static_cast<int>(levels.size()) - 1; }

  std::size_t bin_count() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.size();
    return n;
  }
};

inline std::vector<BinRef> assign_bins(const AttributeBins& bins, double v) {
  return bins.assign(v);
}

// Builds the bin structure for one attribute from its sorted training
// values and records those values in every bin they are assigned to.
inline AttributeBins build_attribute_bins(RelationId attribute,
                                          const AttributeValues& values,
                                          const BinSpec& spec,
                                          ValueKind kind = ValueKind::kQuantity,
                                          std::string_view name = {}) {
  spec.validate();
  AttributeBins out;
  out.attribute = attribute;
  out.kind = kind;
  out.min = values.min;
  out.max = values.max;
  out.count = values.count;
  out.spec = spec;

  const std::size_t distinct = count_distinct(values.values);
  auto intervals = [&](int b) {
    return spec.interval == IntervalStrategy::kFixed
               ? fixed_intervals(values.min, values.max, b)
               : quantile_intervals(values.values, b);
  };

  int b = spec.bins;
  switch (spec.levels) {
    case LevelStrategy::kSingle: {
      b = static_cast<int>(std::min<std::size_t>(b, distinct));
      auto iv = intervals(b);
      out.levels.push_back(make_single_bins(attribute, iv));
      break;
    }
    case LevelStrategy::kOverlapping: {
      b = static_cast<int>(std::min<std::size_t>(b, std::max<std::size_t>(
                                                        1, distinct / 2)));
      auto aux = intervals(distinct >= 2 ? 2 * b : 1);
      out.levels.push_back(make_overlapping_bins(attribute, aux));
      break;
    }
    case LevelStrategy::kHierarchy: {
      std::vector<std::vector<Interval>> levels{
          {{values.min, values.max, true}}};
      long long width = 1;
      b = 1;
      while (width < spec.bins &&
             width * spec.branching <= static_cast<long long>(distinct)) {
        width *= spec.branching;
        levels.push_back(intervals(static_cast<int>(width)));
      }
      b = static_cast<int>(width);
      out.levels = make_hierarchy_bins(attribute, levels);
      break;
    }
  }
  out.effective_bins = b;
  if (b != spec.bins) {
    spdlog::info("attribute {}: {} distinct values, bin count reduced {} -> {}",
                 name.empty() ? std::to_string(attribute) : std::string(name),
                 distinct, spec.bins, b);
  }

  for (double v : values.values) {
    for (BinRef r : out.assign(v)) {
      out.levels[r.level][r.index].training_values.push_back(v);
    }
  }
  for (auto& level : out.levels) {
    for (auto& bin : level) {
      bin.count = bin.training_values.size();
      bin.median = bin_representative(bin);
    }
  }
  return out;
}

class BinDictionary {
 public:
  void insert(AttributeBins bins) {
    RelationId a = bins.attribute;
    attributes_.insert_or_assign(a, std::move(bins));
  }
  const AttributeBins* find(RelationId attribute) const {
    auto it = attributes_.find(attribute);
    return it == attributes_.end() ? nullptr : &it->second;
  }
  const AttributeBins& at(RelationId attribute) const {
    if (auto* p = find(attribute)) return *p;
    throw data_error(fmt::format("attribute {} has no bins", attribute));
  }
  const std::map<RelationId, AttributeBins>& attributes() const {
    return attributes_;
  }
  bool empty() const { return attributes_.empty(); }
  std::size_t size() const { return attributes_.size(); }

 private:
  std::map<RelationId, AttributeBins> attributes_;
};

// Which literal kinds take part in augmentation.
struct KindFilter {
  bool quantities = true;
  bool years = true;
  bool accepts(ValueKind k) const {
    return k == ValueKind::kYear ? years : quantities;
  }
};

inline BinDictionary build_bin_dictionary(const KnowledgeGraph& g,
                                          const BinSpec& spec,
                                          KindFilter kinds = {}) {
  spec.validate();
  std::map<RelationId, ValueKind> attrs;
  for (const auto& t : g.numeric_triples) attrs.emplace(t.attribute, t.kind);
  BinDictionary dict;
  for (auto [a, kind] : attrs) {
    if (!kinds.accepts(kind)) continue;
    dict.insert(build_attribute_bins(a, collect_attribute_values(g, a), spec,
                                     kind, g.relations.name(a)));
  }
  return dict;
}

// Attribute names are emitted in lexicographic order.
inline nlohmann::ordered_json to_json(const BinDictionary& dict,
                                      const Vocabulary& relations) {
  std::vector<std::pair<std::string, const AttributeBins*>> sorted;
  for (const auto& [a, bins] : dict.attributes()) {
    sorted.emplace_back(relations.name(a), &bins);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, bins] : sorted) {
    nlohmann::ordered_json a;
    a["strategy"] = to_string(bins->spec.interval);
    a["levels_mode"] = to_string(bins->spec.levels);
    a["b"] = bins->effective_bins;
    a["requested_b"] = bins->spec.bins;
    a["branching"] = bins->spec.branching;
    a["chaining"] = bins->spec.chaining;
    a["kind"] = to_string(bins->kind);
    a["min"] = bins->min;
    a["max"] = bins->max;
    a["count"] = bins->count;
    auto& levels = a["levels"] = nlohmann::ordered_json::array();
    for (const auto& level : bins->levels) {
      auto jl = nlohmann::ordered_json::array();
      for (const auto& b : level) {
        nlohmann::ordered_json jb;
        jb["lo"] = b.lo;
        jb["hi"] = b.hi;
        jb["closed"] = b.closed;
        jb["median"] = bin_representative(b);
        jb["count"] = b.count;
        if (b.parent >= 0) jb["parent"] = b.parent;
        jl.push_back(std::move(jb));
      }
      levels.push_back(std::move(jl));
    }
    j[name] = std::move(a);
  }
  return j;
}

inline BinDictionary bin_dictionary_from_json(const nlohmann::json& j,
                                              const Vocabulary& relations) {
  BinDictionary dict;
  for (const auto& [name, a] : j.items()) {
    auto id = relations.find(name);
    if (!id) throw data_error(fmt::format("unknown attribute '{}'", name));
    AttributeBins bins;
    bins.attribute = *id;
    bins.spec.interval =
        parse_interval_strategy(a.at("strategy").get<std::string>());
    bins.spec.levels =
        parse_level_strategy(a.at("levels_mode").get<std::string>());
    bins.spec.bins = a.at("requested_b").get<int>();
    bins.spec.branching = a.at("branching").get<int>();
    bins.spec.chaining = a.at("chaining").get<bool>();
    bins.effective_bins = a.at("b").get<int>();
    bins.kind = a.at("kind").get<std::string>() == "year" ? ValueKind::kYear
                                                          : ValueKind::kQuantity;
    bins.min = a.at("min").get<double>();
    bins.max = a.at("max").get<double>();
    bins.count = a.at("count").get<std::size_t>();
    int l = 0;
    for (const auto& jl : a.at("levels")) {
      BinLevel level;
      int i = 0;
      for (const auto& jb : jl) {
        Bin b;
        b.attribute = *id;
        b.level = l;
        b.index = i++;
        b.lo = jb.at("lo").get<double>();
        b.hi = jb.at("hi").get<double>();
        b.closed = jb.at("closed").get<bool>();
        b.median = jb.at("median").get<double>();
        b.count = jb.at("count").get<std::size_t>();
        b.parent = jb.value("parent", -1);
        level.push_back(std::move(b));
      }
      bins.levels.push_back(std::move(level));
      ++l;
    }
    dict.insert(std::move(bins));
  }
  return dict;
}

}  // namespace kga
