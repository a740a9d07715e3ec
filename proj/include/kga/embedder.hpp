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

// TransE, DistMult and ComplEx embeddings trained with self-adversarial
// negative sampling and sparse SGD (optionally with AdaGrad scaling).

#include <atomic>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "kga/common.hpp"
#include "kga/graph.hpp"

namespace kga {

enum class ModelKind { kTransE, kDistMult, kComplEx };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kTransE:
      return "transe";
    case ModelKind::kDistMult:
      return "distmult";
    case ModelKind::kComplEx:
      return "complex";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view raw) {
  std::string s(raw);
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s == "transe") return ModelKind::kTransE;
  if (s == "distmult") return ModelKind::kDistMult;
  if (s == "complex") return ModelKind::kComplEx;
  throw usage_error(fmt::format("unknown model '{}'", s));
}

struct ModelConfig {
  ModelKind kind = ModelKind::kTransE;
  int dim = 64;
  int norm = 1;          // TransE distance norm, 1 or 2
  double margin = 12.0;  // TransE gamma
  int negatives = 16;    // per side, per positive
  double adversarial_temperature = 1.0;
  double learning_rate = 0.05;
  int epochs = 100;
  int batch_size = 512;
  std::uint64_t seed = 0;
  // Kept for parity with 1-N training setups; the sampled loss ignores it.
  double label_smoothing = 0.0;
  double l2 = 0.0;
  bool adagrad = false;
  int threads = 1;

  // Reals per embedding row; ComplEx stores d real then d imaginary parts.
  int width() const { return kind == ModelKind::kComplEx ? 2 * dim : dim; }

  void validate() const {
    if (dim <= 0) throw usage_error("embedding dimension must be positive");
    if (norm != 1 && norm != 2) throw usage_error("norm must be 1 or 2");
    if (margin <= 0) throw usage_error("margin must be positive");
    if (negatives < 1) throw usage_error("negatives must be >= 1");
    if (adversarial_temperature < 0) {
      throw usage_error("adversarial temperature must be >= 0");
    }
    if (learning_rate < 0) throw usage_error("learning rate must be >= 0");
    if (epochs < 0) throw usage_error("epochs must be >= 0");
    if (batch_size < 1) throw usage_error("batch size must be >= 1");
    if (label_smoothing < 0 || label_smoothing >= 1) {
      throw usage_error("label smoothing must be in [0, 1)");
    }
    if (l2 < 0) throw usage_error("l2 must be >= 0");
  }
};

// Full-scale settings (large batches, many negatives). The learning rates
// are only a starting point for the optimizers here.
inline void apply_full_scale_preset(ModelConfig& c) {
  switch (c.kind) {
    case ModelKind::kTransE:
      c.batch_size = 1024;
      c.learning_rate = 0.0001;
      c.negatives = 256;
      c.dim = 1000;
      c.margin = 24.0;
      c.adversarial_temperature = 1.0;
      break;
    case ModelKind::kDistMult:
    case ModelKind::kComplEx:
      c.batch_size = 128;
      c.epochs = 200;
      c.learning_rate = 0.003;
      c.dim = 200;
      c.label_smoothing = 0.1;
      break;
  }
}

inline nlohmann::ordered_json to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = to_string(c.kind);
  j["dim"] = c.dim;
  j["norm"] = c.norm;
  j["margin"] = c.margin;
  j["negatives"] = c.negatives;
  j["adversarial_temperature"] = c.adversarial_temperature;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["label_smoothing"] = c.label_smoothing;
  j["l2"] = c.l2;
  j["adagrad"] = c.adagrad;
  j["threads"] = c.threads;
  return j;
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.kind = parse_model_kind(j.at("model").get<std::string>());
  c.dim = j.at("dim").get<int>();
  c.norm = j.at("norm").get<int>();
  c.margin = j.at("margin").get<double>();
  c.negatives = j.at("negatives").get<int>();
  c.adversarial_temperature = j.at("adversarial_temperature").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.label_smoothing = j.at("label_smoothing").get<double>();
  c.l2 = j.at("l2").get<double>();
  c.adagrad = j.at("adagrad").get<bool>();
  c.threads = j.at("threads").get<int>();
  return c;
}

class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(const ModelConfig& config, std::size_t num_entities,
                 std::size_t num_relations)
      : config_(config),
        num_entities_(num_entities),
        num_relations_(num_relations),
        entities_(num_entities * config.width(), 0.0),
        relations_(num_relations * config.width(), 0.0) {
    if (config.adagrad) {
      entity_g2_.assign(entities_.size(), 0.0);
      relation_g2_.assign(relations_.size(), 0.0);
    }
  }

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }
  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  int width() const { return config_.width(); }

  std::span<double> entity(EntityId e) {
    return {entities_.data() + static_cast<std::size_t>(e) * width(),
            static_cast<std::size_t>(width())};
  }
  std::span<const double> entity(EntityId e) const {
    return {entities_.data() + static_cast<std::size_t>(e) * width(),
            static_cast<std::size_t>(width())};
  }
  std::span<double> relation(RelationId r) {
    return {relations_.data() + static_cast<std::size_t>(r) * width(),
            static_cast<std::size_t>(width())};
  }
  std::span<const double> relation(RelationId r) const {
    return {relations_.data() + static_cast<std::size_t>(r) * width(),
            static_cast<std::size_t>(width())};
  }

  std::vector<double>& entity_table() { return entities_; }
  const std::vector<double>& entity_table() const { return entities_; }
  std::vector<double>& relation_table() { return relations_; }
  const std::vector<double>& relation_table() const { return relations_; }
  std::vector<double>& entity_accumulator() { return entity_g2_; }
  const std::vector<double>& entity_accumulator() const { return entity_g2_; }
  std::vector<double>& relation_accumulator() { return relation_g2_; }
  const std::vector<double>& relation_accumulator() const {
    return relation_g2_;
  }

  std::uint64_t vocab_hash() const { return vocab_hash_; }
  void set_vocab_hash(std::uint64_t h) { vocab_hash_ = h; }

  friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
    return to_json(a.config_) == to_json(b.config_) &&
           a.num_entities_ == b.num_entities_ &&
           a.num_relations_ == b.num_relations_ &&
           a.vocab_hash_ == b.vocab_hash_ && a.entities_ == b.entities_ &&
           a.relations_ == b.relations_ && a.entity_g2_ == b.entity_g2_ &&
           a.relation_g2_ == b.relation_g2_;
  }

 private:
  ModelConfig config_;
  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::vector<double> entities_;
  std::vector<double> relations_;
  std::vector<double> entity_g2_;
  std::vector<double> relation_g2_;
  std::uint64_t vocab_hash_ = 0;
};

// Uniform init in [-6/sqrt(d), 6/sqrt(d)], entities first, then relations.
inline EmbeddingModel init_embeddings(std::size_t num_entities,
                                      std::size_t num_relations,
                                      const ModelConfig& config) {
  config.validate();
  if (num_entities == 0 || num_relations == 0) {
    throw usage_error("vocabularies must be non-empty");
  }
  EmbeddingModel m(config, num_entities, num_relations);
  Rng rng(config.seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(config.dim));
  for (double& x : m.entity_table()) x = uniform_real(rng, -bound, bound);
  for (double& x : m.relation_table()) x = uniform_real(rng, -bound, bound);
  return m;
}

namespace detail {

inline double score_rows(const ModelConfig& c, std::span<const double> h,
                         std::span<const double> r,
                         std::span<const double> t) {
  const int d = c.dim;
  double acc = 0.0;
  switch (c.kind) {
    case ModelKind::kTransE:
      if (c.norm == 1) {
        for (int j = 0; j < d; ++j) acc += std::fabs(h[j] + r[j] - t[j]);
        return c.margin - acc;
      }
      for (int j = 0; j < d; ++j) {
        double x = h[j] + r[j] - t[j];
        acc += x * x;
      }
      return c.margin - std::sqrt(acc);
    case ModelKind::kDistMult:
      for (int j = 0; j < d; ++j) acc += h[j] * r[j] * t[j];
      return acc;
    case ModelKind::kComplEx:
      for (int j = 0; j < d; ++j) {
        const double a = h[j], b = h[d + j];
        const double cr = r[j], ci = r[d + j];
        const double e = t[j], f = t[d + j];
        acc += (a * cr - b * ci) * e + (a * ci + b * cr) * f;
      }
      return acc;
  }
  return 0.0;
}

// Adds coeff * d(score)/d(row) into the three gradient rows.
inline void score_grad_rows(const ModelConfig& c, std::span<const double> h,
                            std::span<const double> r,
                            std::span<const double> t, double coeff,
                            std::span<double> gh, std::span<double> gr,
                            std::span<double> gt) {
  const int d = c.dim;
  switch (c.kind) {
    case ModelKind::kTransE: {
      if (c.norm == 1) {
        for (int j = 0; j < d; ++j) {
          double x = h[j] + r[j] - t[j];
          double s = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
          gh[j] -= coeff * s;
          gr[j] -= coeff * s;
          gt[j] += coeff * s;
        }
        return;
      }
      double norm2 = 0.0;
      for (int j = 0; j < d; ++j) {
        double x = h[j] + r[j] - t[j];
        norm2 += x * x;
      }
      double norm = std::sqrt(norm2);
      if (norm == 0.0) return;
      for (int j = 0; j < d; ++j) {
        double g = coeff * (h[j] + r[j] - t[j]) / norm;
        gh[j] -= g;
        gr[j] -= g;
        gt[j] += g;
      }
      return;
    }
    case ModelKind::kDistMult:
      for (int j = 0; j < d; ++j) {
        gh[j] += coeff * r[j] * t[j];
        gr[j] += coeff * h[j] * t[j];
        gt[j] += coeff * h[j] * r[j];
      }
      return;
    case ModelKind::kComplEx:
      for (int j = 0; j < d; ++j) {
        const double a = h[j], b = h[d + j];
        const double cr = r[j], ci = r[d + j];
        const double e = t[j], f = t[d + j];
        gh[j] += coeff * (cr * e + ci * f);
        gh[d + j] += coeff * (cr * f - ci * e);
        gr[j] += coeff * (a * e + b * f);
        gr[d + j] += coeff * (a * f - b * e);
        gt[j] += coeff * (a * cr - b * ci);
        gt[d + j] += coeff * (a * ci + b * cr);
      }
      return;
  }
}

inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

inline double score(const EmbeddingModel& m, EntityId s, RelationId r,
                    EntityId o) {
  return detail::score_rows(m.config(), m.entity(s), m.relation(r),
                            m.entity(o));
}

inline double score(const EmbeddingModel& m, const EntityTriple& t) {
  return score(m, t.subject, t.relation, t.object);
}

// Sparse gradient rows keyed by id, kept in first-touch order.
class SparseGrad {
 public:
  explicit SparseGrad(int width = 0) : width_(width) {}

  std::span<double> entity(EntityId id) { return row(id, ent_); }
  std::span<double> relation(RelationId id) { return row(id, rel_); }

  void clear() {
    ent_.clear();
    rel_.clear();
  }

  struct Rows {
    std::vector<std::uint32_t> ids;
    std::vector<double> values;
    std::unordered_map<std::uint32_t, std::size_t> index;
    void clear() {
      ids.clear();
      values.clear();
      index.clear();
    }
  };
  const Rows& entities() const { return ent_; }
  const Rows& relations() const { return rel_; }
  int width() const { return width_; }

 private:
  std::span<double> row(std::uint32_t id, Rows& rows) {
    auto [it, fresh] = rows.index.emplace(id, rows.ids.size());
    if (fresh) {
      rows.ids.push_back(id);
      rows.values.resize(rows.values.size() + width_, 0.0);
    }
    return {rows.values.data() + it->second * width_,
            static_cast<std::size_t>(width_)};
  }

  int width_;
  Rows ent_;
  Rows rel_;
};

// Loss of one positive against its negatives:
//   -log s(psi(pos)) - sum_i w_i log s(-psi(neg_i)) + l2 * |pos rows|^2
// with w = softmax(alpha * psi(neg)). The weights are differentiated
// through, so the gradient is that of the loss exactly as written.
inline double example_loss(const EmbeddingModel& m, const EntityTriple& pos,
                           std::span<const EntityTriple> negs,
                           SparseGrad* grad) {
  const ModelConfig& c = m.config();
  const double s_pos = score(m, pos);
  double loss = detail::softplus(-s_pos);

  std::vector<double> s(negs.size()), w(negs.size()), l(negs.size());
  double smax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < negs.size(); ++i) {
    s[i] = score(m, negs[i]);
    smax = std::max(smax, c.adversarial_temperature * s[i]);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < negs.size(); ++i) {
    w[i] = std::exp(c.adversarial_temperature * s[i] - smax);
    z += w[i];
  }
  double neg_loss = 0.0;
  for (std::size_t i = 0; i < negs.size(); ++i) {
    w[i] /= z;
    l[i] = detail::softplus(s[i]);
    neg_loss += w[i] * l[i];
  }
  loss += neg_loss;

  double reg = 0.0;
  if (c.l2 > 0) {
    for (auto row : {m.entity(pos.subject), m.relation(pos.relation),
                     m.entity(pos.object)}) {
      for (double x : row) reg += x * x;
    }
    loss += c.l2 * reg;
  }
  if (!grad) return loss;

  auto add = [&](const EntityTriple& t, double coeff) {
    if (coeff == 0.0) return;
    // Touch both entity rows first; creating a row may move the others.
    grad->entity(t.subject);
    grad->entity(t.object);
    auto gh = grad->entity(t.subject);
    auto gr = grad->relation(t.relation);
    auto gt = grad->entity(t.object);
    detail::score_grad_rows(c, m.entity(t.subject), m.relation(t.relation),
                            m.entity(t.object), coeff, gh, gr, gt);
  };
  add(pos, -detail::sigmoid(-s_pos));
  for (std::size_t i = 0; i < negs.size(); ++i) {
    double g = w[i] * detail::sigmoid(s[i]) +
               c.adversarial_temperature * w[i] * (l[i] - neg_loss);
    add(negs[i], g);
  }
  if (c.l2 > 0) {
    auto reg_row = [&](std::span<const double> row, std::span<double> g) {
      for (std::size_t j = 0; j < row.size(); ++j) g[j] += 2 * c.l2 * row[j];
    };
    grad->entity(pos.subject);
    grad->entity(pos.object);
    reg_row(m.entity(pos.subject), grad->entity(pos.subject));
    reg_row(m.relation(pos.relation), grad->relation(pos.relation));
    reg_row(m.entity(pos.object), grad->entity(pos.object));
  }
  return loss;
}

enum class CorruptSide { kHead, kTail };

// Replaces the head or tail with uniformly drawn entities. Draws that hit a
// known-true triple are redrawn up to max_retries times, then kept.
inline std::vector<EntityTriple> sample_negatives(
    const EntityTriple& t, int k, Rng& rng, CorruptSide side,
    std::size_t num_entities, const TripleSet* known = nullptr,
    int max_retries = 10) {
  std::vector<EntityTriple> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    EntityTriple neg = t;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
      auto e = static_cast<EntityId>(uniform_index(rng, num_entities));
      (side == CorruptSide::kHead ? neg.subject : neg.object) = e;
      bool is_true = neg == t || (known && known->count(neg));
      if (!is_true) break;
    }
    out.push_back(neg);
  }
  return out;
}

struct EpochStats {
  double mean_loss = 0.0;
  std::size_t examples = 0;
};

namespace detail {

// Applies an SGD (or AdaGrad) step for every touched row. With relaxed
// atomics it can run concurrently with other appliers (hogwild).
template <bool kConcurrent>
void apply_rows(const SparseGrad::Rows& rows, int width, double lr,
                bool adagrad, std::vector<double>& table,
                std::vector<double>& g2) {
  for (std::size_t k = 0; k < rows.ids.size(); ++k) {
    const std::size_t base = static_cast<std::size_t>(rows.ids[k]) * width;
    const double* g = rows.values.data() + k * width;
    for (int j = 0; j < width; ++j) {
      double step = lr * g[j];
      if constexpr (kConcurrent) {
        std::atomic_ref<double> p(table[base + j]);
        if (adagrad) {
          std::atomic_ref<double> acc(g2[base + j]);
          double a = acc.load(std::memory_order_relaxed) + g[j] * g[j];
          acc.store(a, std::memory_order_relaxed);
          step /= std::sqrt(a) + 1e-10;
        }
        p.store(p.load(std::memory_order_relaxed) - step,
                std::memory_order_relaxed);
      } else {
        if (adagrad) {
          g2[base + j] += g[j] * g[j];
          step /= std::sqrt(g2[base + j]) + 1e-10;
        }
        table[base + j] -= step;
      }
    }
  }
}

}  // namespace detail

// One pass over shuffled positives. Each positive gets k head and k tail
// corruptions. Gradients are summed over a minibatch and applied at its
// end. With threads > 1 the minibatch is sharded; shard gradients are
// computed against the same parameters and applied without locking.
inline EpochStats train_epoch(EmbeddingModel& m,
                              std::span<const EntityTriple> triples, Rng& rng,
                              const TripleSet* known = nullptr) {
  const ModelConfig& c = m.config();
  if (triples.empty()) throw usage_error("no training triples");
  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng);

  const int threads = std::max(1, c.threads);
  std::vector<SparseGrad> grads(threads, SparseGrad(m.width()));
  std::vector<double> shard_loss(threads);
  double total = 0.0;
  const double lr = c.learning_rate;

  for (std::size_t begin = 0; begin < order.size(); begin += c.batch_size) {
    const std::size_t end =
        std::min(order.size(), begin + static_cast<std::size_t>(c.batch_size));
    std::vector<std::vector<EntityTriple>> negs(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& t = triples[order[i]];
      auto& n = negs[i - begin];
      n = sample_negatives(t, c.negatives, rng, CorruptSide::kHead,
                           m.num_entities(), known);
      auto tails = sample_negatives(t, c.negatives, rng, CorruptSide::kTail,
                                    m.num_entities(), known);
      n.insert(n.end(), tails.begin(), tails.end());
    }
    auto compute = [&](int shard, std::size_t b, std::size_t e) {
      grads[shard].clear();
      shard_loss[shard] = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        shard_loss[shard] += example_loss(m, triples[order[begin + i]],
                                          negs[i], &grads[shard]);
      }
    };
    const std::size_t n = end - begin;
    if (threads == 1) {
      compute(0, 0, n);
      total += shard_loss[0];
      detail::apply_rows<false>(grads[0].entities(), m.width(), lr, c.adagrad,
                                m.entity_table(), m.entity_accumulator());
      detail::apply_rows<false>(grads[0].relations(), m.width(), lr,
                                c.adagrad, m.relation_table(),
                                m.relation_accumulator());
    } else {
      const std::size_t chunk = (n + threads - 1) / threads;
      std::vector<std::thread> pool;
      for (int w = 0; w < threads; ++w) {
        std::size_t b = std::min(n, w * chunk), e = std::min(n, b + chunk);
        pool.emplace_back([&, w, b, e] { compute(w, b, e); });
      }
      for (auto& t : pool) t.join();
      pool.clear();
      for (int w = 0; w < threads; ++w) {
        total += shard_loss[w];
        pool.emplace_back([&, w] {
          detail::apply_rows<true>(grads[w].entities(), m.width(), lr,
                                   c.adagrad, m.entity_table(),
                                   m.entity_accumulator());
          detail::apply_rows<true>(grads[w].relations(), m.width(), lr,
                                   c.adagrad, m.relation_table(),
                                   m.relation_accumulator());
        });
      }
      for (auto& t : pool) t.join();
    }
    if (!std::isfinite(total)) {
      throw Error(ErrorKind::kDivergence,
                  fmt::format("training diverged: non-finite loss after {} "
                              "examples (learning rate {})",
                              end, lr));
    }
  }
  return {total / static_cast<double>(triples.size()), triples.size()};
}

// Checkpoint layout (little-endian):
//   "KGACKPT\0" u32 version, u32 model kind, u32 dim, u64 entities,
//   u64 relations, u64 vocab hash, u64 config-json length, config json,
//   u8 has-accumulators, entity table, relation table, [accumulators],
//   u64 FNV-1a checksum of all preceding bytes.
namespace detail {

inline constexpr char kCheckpointMagic[8] = {'K', 'G', 'A', 'C',
                                             'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { buf_.append(s); }
  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view buf) : buf_(buf) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw data_error("checkpoint is truncated");
  }
  std::string_view buf_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void save_checkpoint(const EmbeddingModel& m,
                            const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes(std::string_view(detail::kCheckpointMagic, 8));
  w.u32(detail::kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(m.config().kind));
  w.u32(static_cast<std::uint32_t>(m.config().dim));
  w.u64(m.num_entities());
  w.u64(m.num_relations());
  w.u64(m.vocab_hash());
  std::string cfg = to_json(m.config()).dump();
  w.u64(cfg.size());
  w.bytes(cfg);
  const bool acc = !m.entity_accumulator().empty();
  w.u8(acc ? 1 : 0);
  for (double x : m.entity_table()) w.f64(x);
  for (double x : m.relation_table()) w.f64(x);
  if (acc) {
    for (double x : m.entity_accumulator()) w.f64(x);
    for (double x : m.relation_accumulator()) w.f64(x);
  }
  Fnv1a h;
  h.update(w.buffer());
  w.u64(h.digest());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error(fmt::format("cannot write '{}'", path.string()));
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw data_error(fmt::format("short write to '{}'", path.string()));
}

// Loads a checkpoint; when expected_vocab_hash is given the model must have
// been trained on that vocabulary.
inline EmbeddingModel load_checkpoint(
    const std::filesystem::path& path,
    std::optional<std::uint64_t> expected_vocab_hash = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error(fmt::format("cannot open '{}'", path.string()));
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 16 || std::memcmp(buf.data(), detail::kCheckpointMagic, 8)) {
    throw data_error(fmt::format("'{}' is not a checkpoint", path.string()));
  }
  Fnv1a h;
  h.update(buf.data(), buf.size() - 8);
  detail::ByteReader tail(std::string_view(buf).substr(buf.size() - 8));
  if (tail.u64() != h.digest()) {
    throw data_error(fmt::format("checkpoint '{}' fails its checksum",
                                 path.string()));
  }
  detail::ByteReader r(std::string_view(buf).substr(8, buf.size() - 16));
  if (r.u32() != detail::kCheckpointVersion) {
    throw data_error("unsupported checkpoint version");
  }
  r.u32();  // kind, repeated in the config
  r.u32();  // dim
  std::size_t ne = r.u64(), nr = r.u64();
  std::uint64_t vocab = r.u64();
  std::size_t len = r.u64();
  ModelConfig cfg = model_config_from_json(nlohmann::json::parse(r.bytes(len)));
  bool acc = r.u8() != 0;
  cfg.adagrad = acc || cfg.adagrad;
  EmbeddingModel m(cfg, ne, nr);
  m.set_vocab_hash(vocab);
  for (double& x : m.entity_table()) x = r.f64();
  for (double& x : m.relation_table()) x = r.f64();
  if (acc) {
    for (double& x : m.entity_accumulator()) x = r.f64();
    for (double& x : m.relation_accumulator()) x = r.f64();
  }
  if (r.remaining() != 0) throw data_error("trailing bytes in checkpoint");
  if (expected_vocab_hash && *expected_vocab_hash != vocab) {
    throw data_error(fmt::format(
        "checkpoint '{}' was trained on a different vocabulary",
        path.string()));
  }
  return m;
}

}  // namespace kga
