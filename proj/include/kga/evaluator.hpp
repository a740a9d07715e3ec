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

// Link-prediction evaluation: filtered, unfiltered and sampled ranking with
// MRR / Hits@K, and numeric prediction (bin argmax + bin median) scored by
// MAE against a per-attribute median baseline.

#include <concepts>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "kga/augmenter.hpp"
#include "kga/common.hpp"
#include "kga/discretizer.hpp"
#include "kga/embedder.hpp"
#include "kga/graph.hpp"

namespace kga {

enum class RankMode { kFiltered, kUnfiltered, kSampled };

inline std::string_view to_string(RankMode m) {
  switch (m) {
    case RankMode::kFiltered:
      return "filtered";
    case RankMode::kUnfiltered:
      return "unfiltered";
    case RankMode::kSampled:
      return "sampled";
  }
  return "?";
}

inline RankMode parse_rank_mode(std::string_view s) {
  if (s == "filtered") return RankMode::kFiltered;
  if (s == "unfiltered") return RankMode::kUnfiltered;
  if (s == "sampled") return RankMode::kSampled;
  throw usage_error(fmt::format("unknown evaluation mode '{}'", s));
}

struct RankOptions {
  RankMode mode = RankMode::kFiltered;
  int sampled_c = 500;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Known answers per (subject, relation) and (relation, object).
class FilterIndex {
 public:
  FilterIndex() = default;
  explicit FilterIndex(
      std::initializer_list<std::span<const EntityTriple>> lists) {
    for (auto list : lists) add(list);
  }

  void add(std::span<const EntityTriple> triples) {
    for (const auto& t : triples) {
      tails_[key(t.subject, t.relation)].push_back(t.object);
      heads_[key(t.object, t.relation)].push_back(t.subject);
    }
  }

  // Entities e such that (fixed, r, e) [tail side] or (e, r, fixed) [head
  // side] is known to be true.
  std::span<const EntityId> answers(EntityId fixed, RelationId r,
                                    CorruptSide side) const {
    const auto& map = side == CorruptSide::kTail ? tails_ : heads_;
    auto it = map.find(key(fixed, r));
    if (it == map.end()) return {};
    return it->second;
  }

 private:
  static std::uint64_t key(EntityId e, RelationId r) {
    return (static_cast<std::uint64_t>(e) << 32) | r;
  }
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> heads_;
};

// Rank of a true score among competitor scores; ties take the mean of the
// positions they could occupy.
inline double tie_averaged_rank(std::size_t greater, std::size_t ties) {
  return 1.0 + static_cast<double>(greater) + 0.5 * static_cast<double>(ties);
}

// Candidate entities for ranking: every non-synthetic entity.
inline std::vector<EntityId> ranking_candidates(const Vocabulary& entities) {
  std::vector<EntityId> out;
  for (EntityId e = 0; e < entities.size(); ++e) {
    if (!entities.is_synthetic(e)) out.push_back(e);
  }
  return out;
}

// Per-thread scratch space for rank_entity.
struct RankScratch {
  std::vector<char> excluded;
  std::vector<std::size_t> drawn;
  std::unordered_set<std::size_t> drawn_set;
};

// Ranks the true entity of `t` on the given side. score_fn(s, r, o) scores
// a triple. Filtered mode skips competitors that form known-true triples;
// sampled mode ranks against min(C, |candidates|-1) distinct candidates
// drawn uniformly from the unfiltered pool.
template <typename ScoreFn>
double rank_entity(ScoreFn&& score_fn, const EntityTriple& t, CorruptSide side,
                   std::span<const EntityId> candidates,
                   const FilterIndex* filter, RankMode mode, int sampled_c,
                   Rng& rng, RankScratch& scratch) {
  const EntityId truth = side == CorruptSide::kTail ? t.object : t.subject;
  const EntityId fixed = side == CorruptSide::kTail ? t.subject : t.object;
  auto score_with = [&](EntityId e) {
    return side == CorruptSide::kTail ? score_fn(t.subject, t.relation, e)
                                      : score_fn(e, t.relation, t.object);
  };
  const double true_score = score_with(truth);
  std::size_t greater = 0, ties = 0;
  auto compare = [&](EntityId e) {
    double s = score_with(e);
    if (s > true_score) {
      ++greater;
    } else if (s == true_score) {
      ++ties;
    }
  };

  if (mode == RankMode::kSampled) {
    // Pool excludes the true entity; draw without replacement.
    const std::size_t pool = candidates.size();
    std::size_t truth_pos = pool;
    for (std::size_t i = 0; i < pool; ++i) {
      if (candidates[i] == truth) {
        truth_pos = i;
        break;
      }
    }
    const std::size_t available = pool - (truth_pos < pool ? 1 : 0);
    const std::size_t want =
        std::min<std::size_t>(static_cast<std::size_t>(sampled_c), available);
    if (want == available) {
      for (std::size_t i = 0; i < pool; ++i) {
        if (i != truth_pos) compare(candidates[i]);
      }
    } else {
      scratch.drawn_set.clear();
      while (scratch.drawn_set.size() < want) {
        std::size_t i = uniform_index(rng, pool);
        if (i == truth_pos || !scratch.drawn_set.insert(i).second) continue;
        compare(candidates[i]);
      }
    }
    return tie_averaged_rank(greater, ties);
  }

  std::span<const EntityId> known;
  if (mode == RankMode::kFiltered && filter) {
    known = filter->answers(fixed, t.relation, side);
    for (EntityId e : known) {
      if (e >= scratch.excluded.size()) scratch.excluded.resize(e + 1, 0);
      scratch.excluded[e] = 1;
    }
  }
  for (EntityId e : candidates) {
    if (e == truth) continue;
    if (e < scratch.excluded.size() && scratch.excluded[e]) continue;
    compare(e);
  }
  for (EntityId e : known) scratch.excluded[e] = 0;
  return tie_averaged_rank(greater, ties);
}

struct RankingResult {
  RankMode mode = RankMode::kFiltered;
  int sampled_c = 0;
  // ranks[2*i] is the head rank and ranks[2*i+1] the tail rank of triple i.
  std::vector<double> ranks;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t n_triples = 0;
};

inline RankingResult summarize_ranks(std::vector<double> ranks) {
  RankingResult r;
  r.ranks = std::move(ranks);
  if (r.ranks.empty()) return r;
  for (double x : r.ranks) {
    r.mrr += 1.0 / x;
    r.hits1 += x <= 1.0 ? 1 : 0;
    r.hits3 += x <= 3.0 ? 1 : 0;
    r.hits10 += x <= 10.0 ? 1 : 0;
  }
  const double n = static_cast<double>(r.ranks.size());
  r.mrr /= n;
  r.hits1 /= n;
  r.hits3 /= n;
  r.hits10 /= n;
  return r;
}

// Ranks both sides of every triple. Per-triple draws are seeded from
// (seed, triple index, side), so results do not depend on thread count.
template <typename ScoreFn>
  requires std::invocable<ScoreFn&, EntityId, RelationId, EntityId>
RankingResult entity_lp_metrics(ScoreFn&& score_fn,
                                std::span<const EntityTriple> test,
                                std::span<const EntityId> candidates,
                                const FilterIndex* filter,
                                const RankOptions& opt) {
  std::vector<double> ranks(2 * test.size());
  parallel_for(test.size(), opt.threads, [&](std::size_t b, std::size_t e) {
    RankScratch scratch;
    for (std::size_t i = b; i < e; ++i) {
      for (int side = 0; side < 2; ++side) {
        Rng rng(mix_seed(opt.seed, 2 * i + side));
        ranks[2 * i + side] = rank_entity(
            score_fn, test[i],
            side == 0 ? CorruptSide::kHead : CorruptSide::kTail, candidates,
            filter, opt.mode, opt.sampled_c, rng, scratch);
      }
    }
  });
  auto r = summarize_ranks(std::move(ranks));
  r.mode = opt.mode;
  r.sampled_c = opt.mode == RankMode::kSampled ? opt.sampled_c : 0;
  r.n_triples = test.size();
  return r;
}

inline RankingResult entity_lp_metrics(const EmbeddingModel& m,
                                       std::span<const EntityTriple> test,
                                       std::span<const EntityId> candidates,
                                       const FilterIndex* filter,
                                       const RankOptions& opt) {
  auto fn = [&m](EntityId s, RelationId r, EntityId o) {
    return score(m, s, r, o);
  };
  return entity_lp_metrics(fn, test, candidates, filter, opt);
}

struct NumericPrediction {
  EntityId entity = 0;
  RelationId attribute = 0;
  BinRef predicted_bin;
  double predicted_value = 0.0;
  double true_value = 0.0;
};

// Picks the highest-scoring bin of the attribute's finest level (all bins
// for overlapping structures); ties go to the lowest index. The value is
// the bin's training median.
inline NumericPrediction predict_numeric(const EmbeddingModel& m,
                                         EntityId entity, RelationId attribute,
                                         const BinDictionary& dict,
                                         const BinEntityRegistry& registry) {
  const AttributeBins* bins = dict.find(attribute);
  if (!bins || !registry.contains(attribute)) {
    throw data_error(fmt::format("attribute {} was not augmented", attribute));
  }
  const int level = bins->prediction_level();
  const auto& ids = registry.levels(attribute).at(level);
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double s = score(m, entity, attribute, ids[i]);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(i);
    }
  }
  NumericPrediction p;
  p.entity = entity;
  p.attribute = attribute;
  p.predicted_bin = {level, best};
  p.predicted_value = bin_representative(bins->bin(p.predicted_bin));
  return p;
}

struct MaeEntry {
  double mae = 0.0;
  std::size_t n = 0;
};

inline std::map<RelationId, MaeEntry> numeric_mae(
    std::span<const NumericPrediction> predictions) {
  std::map<RelationId, MaeEntry> out;
  for (const auto& p : predictions) {
    auto& e = out[p.attribute];
    e.mae += std::fabs(p.predicted_value - p.true_value);
    ++e.n;
  }
  for (auto& [a, e] : out) e.mae /= static_cast<double>(e.n);
  return out;
}

// Predicts the training median of the attribute for every test pair.
inline std::vector<NumericPrediction> median_baseline(
    std::span<const NumericTriple> train, std::span<const NumericTriple> test) {
  std::map<RelationId, std::vector<double>> values;
  for (const auto& t : train) values[t.attribute].push_back(t.value);
  std::map<RelationId, double> medians;
  for (auto& [a, v] : values) {
    std::sort(v.begin(), v.end());
    medians[a] = median_of_sorted(v);
  }
  std::vector<NumericPrediction> out;
  for (const auto& t : test) {
    auto it = medians.find(t.attribute);
    if (it == medians.end()) {
      throw data_error(fmt::format(
          "attribute {} has no training values for the median baseline",
          t.attribute));
    }
    NumericPrediction p;
    p.entity = t.entity;
    p.attribute = t.attribute;
    p.predicted_value = it->second;
    p.true_value = t.value;
    out.push_back(p);
  }
  return out;
}

struct NumericReportEntry {
  double mae = 0.0;
  double baseline_mae = 0.0;
  std::size_t n = 0;
};

// KGA predictions for every held-out numeric triple whose attribute has
// bins, paired with the median baseline on the same triples.
inline std::map<RelationId, NumericReportEntry> evaluate_numeric(
    const EmbeddingModel& m, const AugmentedGraph& g,
    std::span<const NumericTriple> train, std::span<const NumericTriple> test,
    std::vector<NumericPrediction>* predictions_out = nullptr) {
  std::vector<NumericTriple> covered;
  for (const auto& t : test) {
    if (g.bins.find(t.attribute)) covered.push_back(t);
  }
  std::vector<NumericPrediction> kga;
  for (const auto& t : covered) {
    auto p = predict_numeric(m, t.entity, t.attribute, g.bins, g.registry);
    p.true_value = t.value;
    kga.push_back(p);
  }
  auto base = median_baseline(train, covered);
  auto kga_mae = numeric_mae(kga);
  auto base_mae = numeric_mae(base);
  std::map<RelationId, NumericReportEntry> out;
  for (const auto& [a, e] : kga_mae) {
    out[a] = {e.mae, base_mae.at(a).mae, e.n};
  }
  if (predictions_out) *predictions_out = std::move(kga);
  return out;
}

inline nlohmann::ordered_json to_json(const RankingResult& r) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(r.mode);
  if (r.mode == RankMode::kSampled) j["C"] = r.sampled_c;
  j["mrr"] = round_significant(r.mrr, 4);
  j["hits1"] = round_significant(r.hits1, 4);
  j["hits3"] = round_significant(r.hits3, 4);
  j["hits10"] = round_significant(r.hits10, 4);
  j["n_triples"] = r.n_triples;
  return j;
}

inline nlohmann::ordered_json to_json(
    const std::map<RelationId, NumericReportEntry>& numeric,
    const Vocabulary& relations) {
  std::map<std::string, const NumericReportEntry*> sorted;
  for (const auto& [a, e] : numeric) sorted[relations.name(a)] = &e;
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, e] : sorted) {
    j[name] = {{"mae", round_significant(e->mae, 4)},
               {"n", e->n},
               {"baseline_mae", round_significant(e->baseline_mae, 4)}};
  }
  return j;
}

}  // namespace kga
