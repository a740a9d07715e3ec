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

// Subcommand implementations. Output layout under cfg.out:
//   manifest.json  bins/  augmented/  checkpoints/  reports/  grid/
// Nothing written here depends on wall-clock time, so single-threaded
// reruns produce identical files.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kga/augmenter.hpp"
#include "kga/common.hpp"
#include "kga/config.hpp"
#include "kga/discretizer.hpp"
#include "kga/embedder.hpp"
#include "kga/evaluator.hpp"
#include "kga/graph.hpp"

#ifndef KGA_VERSION
#define KGA_VERSION "0.0.0"
#endif

namespace kga {

namespace fs = std::filesystem;

inline void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error(fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw data_error(fmt::format("short write to '{}'", path.string()));
}

inline void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline nlohmann::ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error(fmt::format("cannot open '{}'", path.string()));
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

inline void write_manifest(const ExperimentConfig& cfg, std::string_view command,
                           nlohmann::ordered_json extra = {}) {
  nlohmann::ordered_json j;
  j["tool"] = "kga";
  j["version"] = KGA_VERSION;
  j["command"] = command;
  j["config_hash"] = fmt::format("{:016x}", config_hash(cfg));
  j["config"] = config_to_json(cfg);
  if (!extra.is_null()) j["outputs"] = std::move(extra);
  write_json(cfg.out / "manifest.json", j);
}

// Everything a run needs after loading: the (possibly augmented) training
// graph, the filter over all known entity triples, and ranking candidates.
struct Prepared {
  DatasetSplit split;
  std::optional<AugmentedGraph> augmented;
  Vocabulary entities;
  Vocabulary relations;
  std::vector<EntityTriple> train;
  TripleSet known;
  FilterIndex filter;
  std::vector<EntityId> candidates;
  std::uint64_t vocab_hash = 0;
};

inline std::uint64_t combined_vocab_hash(const Vocabulary& e,
                                         const Vocabulary& r) {
  return mix_seed(e.hash(), r.hash());
}

inline Prepared prepare(const ExperimentConfig& cfg) {
  Prepared p;
  p.split = load_split(cfg.data);
  if (cfg.augment) {
    p.augmented = augment(p.split.train, cfg.bins, cfg.kinds);
    p.entities = p.augmented->entities;
    p.relations = p.augmented->relations;
    p.train = p.augmented->training_triples();
  } else {
    p.entities = p.split.train.entities;
    p.relations = p.split.train.relations;
    p.train = p.split.train.entity_triples;
  }
  if (p.train.empty()) throw data_error("training graph has no triples");
  p.known = TripleSet(p.train.begin(), p.train.end());
  p.filter.add(p.split.train.entity_triples);
  p.filter.add(p.split.valid);
  p.filter.add(p.split.test);
  p.candidates = ranking_candidates(p.entities);
  p.vocab_hash = combined_vocab_hash(p.entities, p.relations);
  return p;
}

struct CheckpointRecord {
  int epoch = 0;
  double valid_mrr = 0.0;
  std::string file;
};

struct TrainResult {
  EmbeddingModel best;
  int best_epoch = 0;
  double best_valid_mrr = 0.0;
  std::vector<double> epoch_loss;
  std::vector<CheckpointRecord> checkpoints;
};

inline nlohmann::ordered_json training_log_json(const TrainResult& r) {
  nlohmann::ordered_json j;
  j["best_epoch"] = r.best_epoch;
  j["best_valid_mrr"] = r.best_valid_mrr;
  j["epoch_loss"] = r.epoch_loss;
  auto& cps = j["checkpoints"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checkpoints) {
    cps.push_back({{"epoch", c.epoch},
                   {"valid_mrr", c.valid_mrr},
                   {"file", c.file},
                   {"best", c.epoch == r.best_epoch}});
  }
  return j;
}

// Trains with validation every cfg.checkpoint_every epochs and after the
// last one; the checkpoint with the highest validation MRR (earliest on
// ties) is kept as best. With a checkpoint directory each evaluated model
// is also written there. epochs = 0 yields the initial model.
inline TrainResult train_model(const ExperimentConfig& cfg, const Prepared& p,
                               const fs::path& checkpoint_dir = {}) {
  EmbeddingModel m =
      init_embeddings(p.entities.size(), p.relations.size(), cfg.model);
  m.set_vocab_hash(p.vocab_hash);
  Rng rng(mix_seed(cfg.model.seed, 0x7472616e));
  RankOptions vopt = cfg.rank_options();
  vopt.mode = RankMode::kFiltered;

  TrainResult r;
  bool have_best = false;
  auto checkpoint = [&](int epoch) {
    CheckpointRecord rec;
    rec.epoch = epoch;
    if (!p.split.valid.empty()) {
      rec.valid_mrr =
          entity_lp_metrics(m, p.split.valid, p.candidates, &p.filter, vopt).mrr;
    }
    if (!checkpoint_dir.empty()) {
      rec.file = fmt::format("epoch_{:04d}.ckpt", epoch);
      fs::create_directories(checkpoint_dir);
      save_checkpoint(m, checkpoint_dir / rec.file);
    }
    spdlog::info("epoch {}: validation MRR {:.4f}", epoch, rec.valid_mrr);
    // Without validation triples the latest checkpoint wins.
    if (!have_best || rec.valid_mrr > r.best_valid_mrr ||
        p.split.valid.empty()) {
      r.best = m;
      r.best_epoch = epoch;
      r.best_valid_mrr = rec.valid_mrr;
      have_best = true;
    }
    r.checkpoints.push_back(std::move(rec));
  };

  if (cfg.model.epochs == 0) checkpoint(0);
  for (int epoch = 1; epoch <= cfg.model.epochs; ++epoch) {
    EpochStats stats;
    try {
      stats = train_epoch(m, p.train, rng, &p.known);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("epoch {}: {}", epoch, e.what()));
    }
    r.epoch_loss.push_back(stats.mean_loss);
    spdlog::debug("epoch {}: loss {:.6f}", epoch, stats.mean_loss);
    if (epoch % cfg.checkpoint_every == 0 || epoch == cfg.model.epochs) {
      checkpoint(epoch);
    }
  }
  return r;
}

struct EvalReport {
  RankingResult entity;
  std::map<RelationId, NumericReportEntry> numeric;
};

inline EvalReport evaluate_model(const ExperimentConfig& cfg, const Prepared& p,
                                 const EmbeddingModel& m) {
  if (m.num_entities() != p.entities.size() ||
      m.num_relations() != p.relations.size()) {
    throw data_error("model tables do not match the graph vocabulary");
  }
  EvalReport r;
  r.entity = entity_lp_metrics(m, p.split.test, p.candidates, &p.filter,
                               cfg.rank_options());
  if (p.augmented && !p.split.test_numeric.empty()) {
    r.numeric = evaluate_numeric(m, *p.augmented, p.split.train.numeric_triples,
                                 p.split.test_numeric);
  }
  return r;
}

inline nlohmann::ordered_json to_json(const EvalReport& r,
                                      const Vocabulary& relations) {
  nlohmann::ordered_json j;
  j["entity"] = to_json(r.entity);
  j["numeric"] = to_json(r.numeric, relations);
  return j;
}

// Aligned plain-text rendering of one or more reports side by side.
inline std::string render_table(
    const std::vector<std::pair<std::string, nlohmann::ordered_json>>& cols) {
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  auto cell = [](const nlohmann::ordered_json& v) {
    if (v.is_null()) return std::string("-");
    if (v.is_number_float()) return format_number(v.get<double>());
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  auto add = [&](const std::string& label, auto getter) {
    std::vector<std::string> vals;
    for (const auto& [name, j] : cols) vals.push_back(cell(getter(j)));
    rows.emplace_back(label, std::move(vals));
  };
  for (const char* key : {"mode", "mrr", "hits1", "hits3", "hits10", "n_triples"}) {
    add(key, [&](const nlohmann::ordered_json& j) {
      return j["entity"].value(key, nlohmann::ordered_json());
    });
  }
  std::set<std::string> attrs;
  for (const auto& [name, j] : cols) {
    for (const auto& [a, v] : j["numeric"].items()) attrs.insert(a);
  }
  for (const auto& a : attrs) {
    for (const char* key : {"mae", "baseline_mae", "n"}) {
      add(fmt::format("{} {}", a, key), [&](const nlohmann::ordered_json& j) {
        if (!j["numeric"].contains(a)) return nlohmann::ordered_json();
        return j["numeric"][a].value(key, nlohmann::ordered_json());
      });
    }
  }
  std::size_t w0 = 6;
  for (const auto& [label, v] : rows) w0 = std::max(w0, label.size());
  std::vector<std::size_t> w;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::size_t width = cols[c].first.size();
    for (const auto& [label, v] : rows) width = std::max(width, v[c].size());
    w.push_back(width);
  }
  std::string out = fmt::format("{:<{}}", "metric", w0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out += fmt::format("  {:>{}}", cols[c].first, w[c]);
  }
  out += '\n';
  for (const auto& [label, v] : rows) {
    out += fmt::format("{:<{}}", label, w0);
    for (std::size_t c = 0; c < v.size(); ++c) {
      out += fmt::format("  {:>{}}", v[c], w[c]);
    }
    out += '\n';
  }
  return out;
}

// ---- subcommands ----------------------------------------------------------

inline nlohmann::ordered_json cmd_stats(const ExperimentConfig& cfg) {
  auto split = load_split(cfg.data);
  return to_json(graph_stats(split));
}

// Writes bins/bins.json and returns a one-line summary per attribute.
inline std::vector<std::string> cmd_bin(const ExperimentConfig& cfg) {
  SplitPaths paths;
  paths.train = cfg.data.train;
  paths.numeric_train = cfg.data.numeric_train;
  if (paths.numeric_train.empty()) {
    throw usage_error("bin needs numeric_train");
  }
  auto split = load_split(paths);
  BinDictionary dict;
  try {
    dict = build_bin_dictionary(split.train, cfg.bins, cfg.kinds);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("binning: {}", e.what()));
  }
  write_json(cfg.out / "bins" / "bins.json",
             to_json(dict, split.train.relations));

  std::vector<std::pair<std::string, const AttributeBins*>> sorted;
  for (const auto& [a, bins] : dict.attributes()) {
    sorted.emplace_back(split.train.relations.name(a), &bins);
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> lines;
  for (const auto& [name, bins] : sorted) {
    const auto& finest = bins->levels.back();
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& b : finest) {
      lo = std::min(lo, b.count);
      hi = std::max(hi, b.count);
    }
    lines.push_back(fmt::format(
        "{}: kind={} b={} (requested {}) levels={} occupancy min={} max={}",
        name, to_string(bins->kind), bins->effective_bins, bins->spec.bins,
        bins->levels.size(), lo, hi));
  }
  write_manifest(cfg, "bin", {{"bins", "bins/bins.json"}});
  return lines;
}

// Writes augmented/train.tsv (G'), the evaluation splits and a manifest
// with triple counts.
inline nlohmann::ordered_json cmd_augment(const ExperimentConfig& cfg) {
  auto split = load_split(cfg.data);
  auto g = augment(split.train, cfg.bins, cfg.kinds);
  const auto dir = cfg.out / "augmented";
  fs::create_directories(dir);
  write_triples_tsv(dir / "train.tsv", g.training_triples(), g.entities,
                    g.relations);
  write_triples_tsv(dir / "valid.tsv", split.valid, g.entities, g.relations);
  write_triples_tsv(dir / "test.tsv", split.test, g.entities, g.relations);
  if (!g.bins.empty()) {
    write_json(cfg.out / "bins" / "bins.json", to_json(g.bins, g.relations));
  }
  std::size_t dropped = 0;
  for (const auto& t : split.train.numeric_triples) {
    if (!g.bins.find(t.attribute)) ++dropped;
  }
  nlohmann::ordered_json m;
  m["entities"] = g.entities.size();
  m["bin_entities"] = g.entities.synthetic_count();
  m["relations"] = g.relations.size();
  m["base_triples"] = g.base.size();
  m["assignment_triples"] = g.assignments.size();
  m["structural_triples"] = g.structural.size();
  m["numeric_triples_replaced"] =
      split.train.numeric_triples.size() - dropped;
  m["numeric_triples_dropped"] = dropped;
  m["training_triples"] = g.base.size() + g.assignments.size() +
                          g.structural.size();
  write_json(dir / "manifest.json", m);
  write_manifest(cfg, "augment", {{"augmented", "augmented/"}});
  return m;
}

// Trains and writes checkpoints/epoch_*.ckpt, checkpoints/best.ckpt with a
// sidecar best.ckpt.json (config and training log), and
// checkpoints/training_log.json.
inline TrainResult cmd_train(const ExperimentConfig& cfg) {
  auto p = prepare(cfg);
  const auto dir = cfg.out / "checkpoints";
  fs::create_directories(dir);
  auto r = train_model(cfg, p, dir);
  save_checkpoint(r.best, dir / "best.ckpt");
  nlohmann::ordered_json side;
  side["config"] = config_to_json(cfg);
  side["vocab_hash"] = fmt::format("{:016x}", p.vocab_hash);
  side["training"] = training_log_json(r);
  write_json(dir / "best.ckpt.json", side);
  write_json(dir / "training_log.json", training_log_json(r));
  if (p.augmented && !p.augmented->bins.empty()) {
    write_json(cfg.out / "bins" / "bins.json",
               to_json(p.augmented->bins, p.augmented->relations));
  }
  write_manifest(cfg, "train", {{"checkpoints", "checkpoints/"}});
  return r;
}

// The experiment config a checkpoint was trained with: its sidecar (or the
// best.ckpt.json next to it) if present, else the given config. Evaluation
// settings always come from the given config.
inline ExperimentConfig config_for_checkpoint(const ExperimentConfig& cfg,
                                              const fs::path& ckpt) {
  fs::path side = ckpt;
  side += ".json";
  if (!fs::exists(side)) side = ckpt.parent_path() / "best.ckpt.json";
  if (!fs::exists(side)) return cfg;
  ExperimentConfig c = config_from_json(read_json(side).at("config"));
  c.out = cfg.out;
  c.eval_mode = cfg.eval_mode;
  c.sampled_c = cfg.sampled_c;
  c.bins_file = cfg.bins_file;
  c.model.threads = cfg.model.threads;
  return c;
}

inline nlohmann::ordered_json evaluate_checkpoint(const ExperimentConfig& cfg,
                                                  const fs::path& ckpt) {
  ExperimentConfig c = config_for_checkpoint(cfg, ckpt);
  auto p = prepare(c);
  auto m = load_checkpoint(ckpt, p.vocab_hash);
  if (!c.bins_file.empty()) {
    if (!p.augmented) {
      throw usage_error("a bin dictionary was given for a vanilla checkpoint");
    }
    auto expected = to_json(p.augmented->bins, p.augmented->relations);
    if (read_json(c.bins_file) != expected) {
      throw data_error(fmt::format(
          "bin dictionary '{}' does not match the checkpoint's graph",
          c.bins_file.string()));
    }
  }
  auto j = to_json(evaluate_model(c, p, m), p.relations);
  nlohmann::ordered_json out;
  out["variant"] = c.augment ? fmt::format("{}/{}", c.bins.code(), c.bins.bins)
                             : std::string("vanilla");
  out["model"] = to_string(c.model.kind);
  out["seed"] = c.model.seed;
  out["entity"] = j["entity"];
  out["numeric"] = j["numeric"];
  return out;
}

// Writes reports/eval.{json,txt}; with a second checkpoint also
// reports/compare.{json,txt} holding both reports and their MRR difference.
inline std::string cmd_eval(const ExperimentConfig& cfg, const fs::path& ckpt,
                            const std::optional<fs::path>& other = {}) {
  const auto dir = cfg.out / "reports";
  auto a = evaluate_checkpoint(cfg, ckpt);
  write_json(dir / "eval.json", a);
  std::string table = render_table({{a["variant"].get<std::string>(), a}});
  write_text(dir / "eval.txt", table);
  if (other) {
    auto b = evaluate_checkpoint(cfg, *other);
    nlohmann::ordered_json cmp;
    cmp["a"] = a;
    cmp["b"] = b;
    cmp["mrr_delta"] = round_significant(
        a["entity"]["mrr"].get<double>() - b["entity"]["mrr"].get<double>(), 4);
    write_json(dir / "compare.json", cmp);
    std::string la = "A " + a["variant"].get<std::string>();
    std::string lb = "B " + b["variant"].get<std::string>();
    table = render_table({{la, a}, {lb, b}});
    table += fmt::format("mrr delta (A - B): {}\n",
                         format_number(cmp["mrr_delta"].get<double>()));
    write_text(dir / "compare.txt", table);
  }
  write_manifest(cfg, "eval", {{"reports", "reports/"}});
  return table;
}

// One cell: train then evaluate the best checkpoint, all under cfg.out.
inline nlohmann::ordered_json run_experiment(const ExperimentConfig& cfg) {
  cmd_train(cfg);
  cmd_eval(cfg, cfg.out / "checkpoints" / "best.ckpt");
  return read_json(cfg.out / "reports" / "eval.json");
}

struct GridCell {
  std::string label;  // e.g. "QHC/8" or "vanilla"
  std::string dir;    // e.g. "QHC-8"
  ExperimentConfig config;
};

inline std::vector<GridCell> grid_cells(const ExperimentConfig& cfg) {
  std::vector<GridCell> cells;
  if (cfg.grid.vanilla) {
    GridCell c{"vanilla", "vanilla", cfg};
    c.config.augment = false;
    cells.push_back(std::move(c));
  }
  for (const auto& v : cfg.grid.variants) {
    for (int b : cfg.grid.bins) {
      BinSpec spec = parse_variant(v, b);
      if (!spec.chaining && spec.levels != LevelStrategy::kOverlapping) {
        throw usage_error(fmt::format(
            "variant '{}': chaining can only be disabled for overlapping bins",
            v));
      }
      spec.branching = cfg.bins.branching;
      GridCell c{fmt::format("{}/{}", v, b), fmt::format("{}-{}", v, b), cfg};
      c.config.augment = true;
      c.config.bins = spec;
      cells.push_back(std::move(c));
    }
  }
  for (auto& c : cells) c.config.out = cfg.out / "grid" / c.dir;
  return cells;
}

// Runs every cell not already finished, then writes grid/results.tsv and
// grid/results.json. A failing cell is recorded and the grid moves on.
inline nlohmann::ordered_json cmd_grid(const ExperimentConfig& cfg) {
  auto cells = grid_cells(cfg);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::string tsv =
      "variant\tmodel\tmrr\thits1\thits3\thits10\tnumeric_mae\tbaseline_mae\t"
      "status\n";
  for (const auto& cell : cells) {
    const auto report = cell.config.out / "reports" / "eval.json";
    nlohmann::ordered_json row;
    row["variant"] = cell.label;
    row["model"] = to_string(cfg.model.kind);
    try {
      nlohmann::ordered_json r;
      if (fs::exists(report)) {
        spdlog::info("grid: {} already done", cell.label);
        r = read_json(report);
      } else {
        spdlog::info("grid: running {}", cell.label);
        r = run_experiment(cell.config);
      }
      row["entity"] = r["entity"];
      row["numeric"] = r["numeric"];
      row["status"] = "ok";
    } catch (const std::exception& e) {
      spdlog::error("grid: {} failed: {}", cell.label, e.what());
      row["status"] = "failed";
      row["error"] = e.what();
    }
    auto metric = [&](const char* key) {
      if (!row.contains("entity")) return std::string("-");
      return format_number(row["entity"][key].get<double>());
    };
    // Numeric columns average over attributes, weighted by test count.
    std::string mae = "-", base = "-";
    if (row.contains("numeric") && !row["numeric"].empty()) {
      double s = 0, sb = 0, n = 0;
      for (const auto& [a, v] : row["numeric"].items()) {
        double k = v["n"].get<double>();
        s += v["mae"].get<double>() * k;
        sb += v["baseline_mae"].get<double>() * k;
        n += k;
      }
      mae = format_number(round_significant(s / n, 4));
      base = format_number(round_significant(sb / n, 4));
    }
    tsv += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", cell.label,
                       row["model"].get<std::string>(), metric("mrr"),
                       metric("hits1"), metric("hits3"), metric("hits10"), mae,
                       base, row["status"].get<std::string>());
    rows.push_back(std::move(row));
  }
  write_text(cfg.out / "grid" / "results.tsv", tsv);
  write_json(cfg.out / "grid" / "results.json", rows);
  write_manifest(cfg, "grid", {{"results", "grid/results.tsv"}});
  return rows;
}

}  // namespace kga
