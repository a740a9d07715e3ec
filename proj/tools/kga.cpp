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

// kga: bin, augment, train, eval, grid, stats (and synth for a toy dataset).
// Exit codes: 0 ok, 1 usage, 2 data, 3 training divergence.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kga/config.hpp"
#include "kga/pipeline.hpp"
#include "kga/synthetic.hpp"

namespace {

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

bool is_bool_field(const std::string& key) {
  return key == "augment" || key == "chaining" || key == "adagrad" ||
         key == "grid_vanilla";
}

// Registers --config plus one flag per config field on a subcommand. Values
// land in `raw` and are applied after the config file.
void add_config_flags(CLI::App* cmd, std::string& config_path,
                      std::map<std::string, std::optional<std::string>>& raw) {
  cmd->add_option("-c,--config", config_path, "key = value config file");
  for (const auto& f : kga::config_fields()) {
    std::string names = flag_name(f.key);
    if (f.key == "sampled_c") names += ",--sampled-C";
    auto* opt = cmd->add_option_function<std::string>(
        names, [&raw, key = f.key](const std::string& v) { raw[key] = v; },
        f.help);
    if (is_bool_field(f.key)) {
      opt->expected(0, 1);
      opt->default_str("true");
      opt->each([&raw, key = f.key](const std::string& v) {
        raw[key] = v.empty() ? "true" : v;
      });
    }
  }
}

kga::ExperimentConfig build_config(
    const std::string& config_path,
    const std::map<std::string, std::optional<std::string>>& raw) {
  kga::ExperimentConfig cfg = kga::default_config();
  if (!config_path.empty()) kga::load_config_file(cfg, config_path);
  for (const auto& [key, value] : raw) {
    if (value) kga::set_config_value(cfg, key, *value);
  }
  kga::finalize_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge graph augmentation with binned numeric literals"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");
  app.set_version_flag("--version", KGA_VERSION);

  std::string config_path;
  std::map<std::string, std::optional<std::string>> raw;

  auto* stats = app.add_subcommand("stats", "print dataset statistics as JSON");
  auto* bin = app.add_subcommand("bin", "build the bin dictionary");
  auto* aug = app.add_subcommand("augment", "write the augmented graph");
  auto* train = app.add_subcommand("train", "train an embedding model");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* grid = app.add_subcommand("grid", "run the ablation grid");
  for (auto* cmd : {stats, bin, aug, train, eval, grid}) {
    add_config_flags(cmd, config_path, raw);
  }
  std::string checkpoint, compare;
  eval->add_option("--checkpoint", checkpoint,
                   "checkpoint to evaluate (default: <out>/checkpoints/best.ckpt)");
  eval->add_option("--compare", compare,
                   "second checkpoint for a paired report");

  auto* synth = app.add_subcommand("synth", "write the synthetic benchmark");
  std::string synth_dir;
  kga::synthetic::Options synth_opt;
  synth->add_option("dir", synth_dir, "output directory")->required();
  synth->add_option("--entities", synth_opt.entities);
  synth->add_option("--relations", synth_opt.relations);
  synth->add_option("--bands", synth_opt.bands);
  synth->add_option("--noise", synth_opt.noise_triples);
  synth->add_option("--edges-per-entity", synth_opt.train_edges_per_entity);
  synth->add_option("--seed", synth_opt.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto logger = spdlog::stderr_color_mt("kga");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(verbose ? spdlog::level::debug
                            : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (synth->parsed()) {
      auto paths = kga::synthetic::write(kga::synthetic::generate(synth_opt),
                                         synth_dir);
      std::cout << "train = " << paths.train.string() << '\n'
                << "valid = " << paths.valid.string() << '\n'
                << "test = " << paths.test.string() << '\n'
                << "numeric_train = " << paths.numeric_train.string() << '\n'
                << "numeric_valid = " << paths.numeric_valid.string() << '\n'
                << "numeric_test = " << paths.numeric_test.string() << '\n';
      return 0;
    }
    auto cfg = build_config(config_path, raw);
    if (stats->parsed()) {
      std::cout << kga::cmd_stats(cfg).dump(2) << '\n';
    } else if (bin->parsed()) {
      for (const auto& line : kga::cmd_bin(cfg)) std::cout << line << '\n';
    } else if (aug->parsed()) {
      std::cout << kga::cmd_augment(cfg).dump(2) << '\n';
    } else if (train->parsed()) {
      auto r = kga::cmd_train(cfg);
      std::cout << fmt::format("best epoch {} (validation MRR {})\n",
                               r.best_epoch,
                               kga::format_number(
                                   kga::round_significant(r.best_valid_mrr, 4)));
    } else if (eval->parsed()) {
      std::filesystem::path ckpt =
          checkpoint.empty() ? cfg.out / "checkpoints" / "best.ckpt"
                             : std::filesystem::path(checkpoint);
      std::optional<std::filesystem::path> other;
      if (!compare.empty()) other = compare;
      std::cout << kga::cmd_eval(cfg, ckpt, other);
    } else if (grid->parsed()) {
      kga::cmd_grid(cfg);
      std::ifstream in(cfg.out / "grid" / "results.tsv");
      std::cout << in.rdbuf();
    }
  } catch (const kga::Error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(kga::ErrorKind::kData);
  }
  return 0;
}
