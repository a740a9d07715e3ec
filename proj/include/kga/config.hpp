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

// Experiment configuration. Every setting is a named field with a default;
// config files are flat `key = value` text and command-line flags use the
// same names with dashes.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kga/common.hpp"
#include "kga/discretizer.hpp"
#include "kga/embedder.hpp"
#include "kga/evaluator.hpp"
#include "kga/graph.hpp"

namespace kga {

// Parses a variant code such as "QHC" into a bin spec with the given count.
inline BinSpec parse_variant(std::string_view code, int bins) {
  if (code.size() != 3) {
    throw usage_error(fmt::format("variant '{}' is not a 3-letter code", code));
  }
  BinSpec s;
  s.interval = parse_interval_strategy(code.substr(0, 1));
  s.levels = parse_level_strategy(code.substr(1, 1));
  if (code[2] != 'C' && code[2] != 'N') {
    throw usage_error(fmt::format("variant '{}' must end in C or N", code));
  }
  s.chaining = code[2] == 'C';
  s.bins = bins;
  return s;
}

struct GridSpec {
  std::vector<std::string> variants = {"FSC", "FOC", "FON", "FHC",
                                       "QSC", "QOC", "QON", "QHC"};
  std::vector<int> bins = {2, 4, 8, 16, 32};
  bool vanilla = true;
};

struct ExperimentConfig {
  SplitPaths data;
  bool augment = true;
  BinSpec bins;
  KindFilter kinds;
  ModelConfig model;
  bool full_scale_preset = false;
  RankMode eval_mode = RankMode::kFiltered;
  int sampled_c = 500;
  int checkpoint_every = 5;
  std::filesystem::path out = "kga_out";
  std::filesystem::path bins_file;  // optional dictionary to check in eval
  GridSpec grid;
  // Keys set explicitly, so presets do not overwrite them.
  std::set<std::string> explicit_keys;

  RankOptions rank_options() const {
    RankOptions o;
    o.mode = eval_mode;
    o.sampled_c = sampled_c;
    o.seed = model.seed;
    o.threads = model.threads;
    return o;
  }
};

namespace detail {

inline int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw usage_error(fmt::format("{}: '{}' is not an integer", key, v));
  }
  return out;
}

inline std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw usage_error(
        fmt::format("{}: '{}' is not a non-negative integer", key, v));
  }
  return out;
}

inline double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!parse_double(v, out)) {
    throw usage_error(fmt::format("{}: '{}' is not a number", key, v));
  }
  return out;
}

inline bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw usage_error(fmt::format("{}: '{}' is not a boolean", key, v));
}

inline std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    auto comma = v.find(',', start);
    auto item = v.substr(start, comma == std::string_view::npos
                                    ? std::string_view::npos
                                    : comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

inline std::string kinds_to_string(KindFilter k) {
  if (k.quantities && k.years) return "both";
  return k.years ? "year" : "quantity";
}

inline KindFilter parse_kinds(std::string_view v) {
  if (v == "both") return {true, true};
  if (v == "quantity") return {true, false};
  if (v == "year") return {false, true};
  throw usage_error(
      fmt::format("kinds: '{}' is not one of both, quantity, year", v));
}

}  // namespace detail

struct ConfigField {
  std::string key;
  std::string help;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool is_path = false;
};

inline const std::vector<ConfigField>& config_fields() {
  using C = ExperimentConfig;
  using namespace detail;
  auto path_field = [](std::string key, std::string help,
                       std::filesystem::path C::*member_outer,
                       std::filesystem::path SplitPaths::*member_inner) {
    ConfigField f;
    f.key = key;
    f.help = std::move(help);
    f.is_path = true;
    f.set = [=](C& c, std::string_view v) {
      if (member_inner) {
        c.data.*member_inner = std::filesystem::path(v);
      } else {
        c.*member_outer = std::filesystem::path(v);
      }
    };
    f.get = [=](const C& c) {
      return member_inner ? (c.data.*member_inner).string()
                          : (c.*member_outer).string();
    };
    return f;
  };
  static const std::vector<ConfigField> fields = [&] {
    std::vector<ConfigField> f;
    f.push_back(path_field("train", "training entity triples (TSV)", nullptr,
                           &SplitPaths::train));
    f.push_back(path_field("valid", "validation entity triples (TSV)", nullptr,
                           &SplitPaths::valid));
    f.push_back(path_field("test", "test entity triples (TSV)", nullptr,
                           &SplitPaths::test));
    f.push_back(path_field("numeric_train", "training numeric triples (TSV)",
                           nullptr, &SplitPaths::numeric_train));
    f.push_back(path_field("numeric_valid", "validation numeric triples (TSV)",
                           nullptr, &SplitPaths::numeric_valid));
    f.push_back(path_field("numeric_test", "test numeric triples (TSV)",
                           nullptr, &SplitPaths::numeric_test));
    f.push_back({"augment", "train on the augmented graph (false = vanilla)",
                 [](C& c, std::string_view v) { c.augment = to_bool("augment", v); },
                 [](const C& c) { return std::string(c.augment ? "true" : "false"); }});
    f.push_back({"strategy", "interval strategy: fixed | quantile",
                 [](C& c, std::string_view v) {
                   c.bins.interval = parse_interval_strategy(v);
                 },
                 [](const C& c) { return std::string(to_string(c.bins.interval)); }});
    f.push_back({"levels", "level strategy: single | overlapping | hierarchy",
                 [](C& c, std::string_view v) {
                   c.bins.levels = parse_level_strategy(v);
                 },
                 [](const C& c) { return std::string(to_string(c.bins.levels)); }});
    f.push_back({"bins", "bins per attribute (finest level for hierarchy)",
                 [](C& c, std::string_view v) { c.bins.bins = to_int("bins", v); },
                 [](const C& c) { return std::to_string(c.bins.bins); }});
    f.push_back({"branching", "hierarchy branching factor",
                 [](C& c, std::string_view v) {
                   c.bins.branching = to_int("branching", v);
                 },
                 [](const C& c) { return std::to_string(c.bins.branching); }});
    f.push_back({"chaining", "link neighbouring bins with kga:next",
                 [](C& c, std::string_view v) {
                   c.bins.chaining = to_bool("chaining", v);
                 },
                 [](const C& c) {
                   return std::string(c.bins.chaining ? "true" : "false");
                 }});
    f.push_back({"kinds", "literal kinds to augment: both | quantity | year",
                 [](C& c, std::string_view v) { c.kinds = parse_kinds(v); },
                 [](const C& c) { return kinds_to_string(c.kinds); }});
    f.push_back({"model", "transe | distmult | complex",
                 [](C& c, std::string_view v) { c.model.kind = parse_model_kind(v); },
                 [](const C& c) { return std::string(to_string(c.model.kind)); }});
    f.push_back({"dim", "embedding dimension",
                 [](C& c, std::string_view v) { c.model.dim = to_int("dim", v); },
                 [](const C& c) { return std::to_string(c.model.dim); }});
    f.push_back({"norm", "TransE distance norm (1 or 2)",
                 [](C& c, std::string_view v) { c.model.norm = to_int("norm", v); },
                 [](const C& c) { return std::to_string(c.model.norm); }});
    f.push_back({"margin", "TransE margin gamma",
                 [](C& c, std::string_view v) {
                   c.model.margin = to_double("margin", v);
                 },
                 [](const C& c) { return format_number(c.model.margin); }});
    f.push_back({"negatives", "negatives per side per positive",
                 [](C& c, std::string_view v) {
                   c.model.negatives = to_int("negatives", v);
                 },
                 [](const C& c) { return std::to_string(c.model.negatives); }});
    f.push_back({"adv_temperature", "self-adversarial temperature (0 = uniform)",
                 [](C& c, std::string_view v) {
                   c.model.adversarial_temperature = to_double("adv_temperature", v);
                 },
                 [](const C& c) {
                   return format_number(c.model.adversarial_temperature);
                 }});
    f.push_back({"lr", "learning rate",
                 [](C& c, std::string_view v) {
                   c.model.learning_rate = to_double("lr", v);
                 },
                 [](const C& c) { return format_number(c.model.learning_rate); }});
    f.push_back({"epochs", "training epochs",
                 [](C& c, std::string_view v) { c.model.epochs = to_int("epochs", v); },
                 [](const C& c) { return std::to_string(c.model.epochs); }});
    f.push_back({"batch", "minibatch size",
                 [](C& c, std::string_view v) {
                   c.model.batch_size = to_int("batch", v);
                 },
                 [](const C& c) { return std::to_string(c.model.batch_size); }});
    f.push_back({"seed", "random seed for init, sampling and evaluation",
                 [](C& c, std::string_view v) { c.model.seed = to_u64("seed", v); },
                 [](const C& c) { return std::to_string(c.model.seed); }});
    f.push_back({"label_smoothing", "accepted for parity; unused by the loss",
                 [](C& c, std::string_view v) {
                   c.model.label_smoothing = to_double("label_smoothing", v);
                 },
                 [](const C& c) { return format_number(c.model.label_smoothing); }});
    f.push_back({"l2", "L2 penalty on the rows of each positive",
                 [](C& c, std::string_view v) { c.model.l2 = to_double("l2", v); },
                 [](const C& c) { return format_number(c.model.l2); }});
    f.push_back({"adagrad", "scale steps by accumulated squared gradients",
                 [](C& c, std::string_view v) {
                   c.model.adagrad = to_bool("adagrad", v);
                 },
                 [](const C& c) {
                   return std::string(c.model.adagrad ? "true" : "false");
                 }});
    f.push_back({"threads", "worker threads (default from KGA_THREADS)",
                 [](C& c, std::string_view v) {
                   c.model.threads = to_int("threads", v);
                 },
                 [](const C& c) { return std::to_string(c.model.threads); }});
    f.push_back({"preset", "none | full (full-scale hyperparameters)",
                 [](C& c, std::string_view v) {
                   if (v != "none" && v != "full") {
                     throw usage_error(fmt::format("preset: unknown '{}'", v));
                   }
                   c.full_scale_preset = v == "full";
                 },
                 [](const C& c) {
                   return std::string(c.full_scale_preset ? "full" : "none");
                 }});
    f.push_back({"checkpoint_every", "epochs between checkpoints",
                 [](C& c, std::string_view v) {
                   c.checkpoint_every = to_int("checkpoint_every", v);
                 },
                 [](const C& c) { return std::to_string(c.checkpoint_every); }});
    f.push_back({"eval_mode", "filtered | unfiltered | sampled",
                 [](C& c, std::string_view v) { c.eval_mode = parse_rank_mode(v); },
                 [](const C& c) { return std::string(to_string(c.eval_mode)); }});
    f.push_back({"sampled_c", "corrupted candidates in sampled mode",
                 [](C& c, std::string_view v) {
                   c.sampled_c = to_int("sampled_c", v);
                 },
                 [](const C& c) { return std::to_string(c.sampled_c); }});
    f.push_back(path_field("out", "output directory", &C::out, nullptr));
    f.push_back(path_field("bins_file",
                           "bin dictionary to check against during eval",
                           &C::bins_file, nullptr));
    f.push_back({"grid_variants", "grid variant codes, comma separated",
                 [](C& c, std::string_view v) { c.grid.variants = to_list(v); },
                 [](const C& c) { return join(c.grid.variants); }});
    f.push_back({"grid_bins", "grid bin counts, comma separated",
                 [](C& c, std::string_view v) {
                   c.grid.bins.clear();
                   for (const auto& s : to_list(v)) {
                     c.grid.bins.push_back(to_int("grid_bins", s));
                   }
                 },
                 [](const C& c) {
                   std::vector<std::string> s;
                   for (int b : c.grid.bins) s.push_back(std::to_string(b));
                   return join(s);
                 }});
    f.push_back({"grid_vanilla", "include the vanilla model as a grid row",
                 [](C& c, std::string_view v) {
                   c.grid.vanilla = to_bool("grid_vanilla", v);
                 },
                 [](const C& c) {
                   return std::string(c.grid.vanilla ? "true" : "false");
                 }});
    return f;
  }();
  return fields;
}

inline const ConfigField* find_field(std::string_view key) {
  for (const auto& f : config_fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

inline ExperimentConfig default_config() {
  ExperimentConfig c;
  c.model.threads = default_threads();
  return c;
}

inline void set_config_value(ExperimentConfig& c, std::string_view key,
                             std::string_view value) {
  const ConfigField* f = find_field(key);
  if (!f) throw usage_error(fmt::format("unknown config key '{}'", key));
  f->set(c, value);
  c.explicit_keys.insert(std::string(key));
}

// Reads `key = value` lines; '#' starts a comment. Relative paths are taken
// relative to the file's directory.
inline void load_config_file(ExperimentConfig& c,
                             const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw usage_error(fmt::format("cannot open config '{}'", path.string()));
  const auto base = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
      s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
      s.remove_suffix(1);
    }
    return s;
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) {
      s = s.substr(0, hash);
    }
    s = trim(s);
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw usage_error(fmt::format("{}:{}: expected key = value",
                                    path.string(), lineno));
    }
    auto key = trim(s.substr(0, eq));
    auto value = trim(s.substr(eq + 1));
    const ConfigField* f = find_field(key);
    if (!f) {
      throw usage_error(fmt::format("{}:{}: unknown config key '{}'",
                                    path.string(), lineno, key));
    }
    if (f->is_path && !value.empty() &&
        std::filesystem::path(value).is_relative()) {
      set_config_value(c, key, (base / std::filesystem::path(value)).string());
    } else {
      set_config_value(c, key, value);
    }
  }
}

// Applies the full-scale preset to fields the user did not set, then checks
// every component.
inline void finalize_config(ExperimentConfig& c) {
  if (c.full_scale_preset) {
    ModelConfig preset = c.model;
    apply_full_scale_preset(preset);
    auto keep = [&](const char* key) { return c.explicit_keys.count(key) > 0; };
    if (!keep("dim")) c.model.dim = preset.dim;
    if (!keep("margin")) c.model.margin = preset.margin;
    if (!keep("negatives")) c.model.negatives = preset.negatives;
    if (!keep("adv_temperature")) {
      c.model.adversarial_temperature = preset.adversarial_temperature;
    }
    if (!keep("lr")) c.model.learning_rate = preset.learning_rate;
    if (!keep("epochs")) c.model.epochs = preset.epochs;
    if (!keep("batch")) c.model.batch_size = preset.batch_size;
    if (!keep("label_smoothing")) c.model.label_smoothing = preset.label_smoothing;
  }
  c.model.validate();
  if (c.augment) c.bins.validate();
  if (c.checkpoint_every < 1) throw usage_error("checkpoint_every must be >= 1");
  if (c.sampled_c < 1) throw usage_error("sampled_c must be >= 1");
}

// Every field as a string, in registry order. The output directory is left
// out so that identical experiments hash the same wherever they are run.
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c,
                                             bool include_out = false) {
  nlohmann::ordered_json j;
  for (const auto& f : config_fields()) {
    if (!include_out && (f.key == "out" || f.key == "preset")) continue;
    j[f.key] = f.get(c);
  }
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c = default_config();
  for (const auto& [key, value] : j.items()) {
    set_config_value(c, key, value.get<std::string>());
  }
  // Values already carry any preset.
  c.full_scale_preset = false;
  return c;
}

inline std::uint64_t config_hash(const ExperimentConfig& c) {
  Fnv1a h;
  h.update(config_to_json(c).dump());
  return h.digest();
}

}  // namespace kga
