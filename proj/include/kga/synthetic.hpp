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

// Synthetic benchmark with one skewed year attribute. The target relation
// holds between two entities iff their years fall into the same quantile
// band, so the literal carries information the entity graph only hints at.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kga/common.hpp"
#include "kga/discretizer.hpp"
#include "kga/graph.hpp"

namespace kga::synthetic {

struct Options {
  int entities = 500;
  int relations = 30;  // target relation + noise relations
  int bands = 8;
  double year_scale = 150.0;  // mean of the exponential age distribution
  int max_year = 2021;
  // Target-relation edges per entity kept for training; every other true
  // pair goes to valid (a sample) or test.
  int train_edges_per_entity = 3;
  int valid_target_triples = 300;
  int noise_triples = 1000;
  double numeric_test_fraction = 0.2;
  double numeric_valid_fraction = 0.05;
  std::uint64_t seed = 7;
};

inline constexpr std::string_view kTargetRelation = "same_band";
inline constexpr std::string_view kYearAttribute = "birth_year";

struct Dataset {
  std::vector<std::string> entity_names;
  std::vector<double> years;
  std::vector<int> band;
  std::vector<std::array<std::string, 3>> train, valid, test;
  std::vector<std::array<std::string, 3>> numeric_train, numeric_valid,
      numeric_test;
};

inline Dataset generate(const Options& opt) {
  Rng rng(opt.seed);
  Dataset d;
  const int n = opt.entities;
  for (int i = 0; i < n; ++i) {
    d.entity_names.push_back(fmt::format("ent{:04d}", i));
    double age = -opt.year_scale * std::log1p(-uniform_real(rng));
    d.years.push_back(std::max(1.0, std::floor(opt.max_year - age)));
  }
  std::vector<double> sorted = d.years;
  std::sort(sorted.begin(), sorted.end());
  auto bands = quantile_intervals(sorted, opt.bands);
  for (double y : d.years) {
    int b = 0;
    while (b + 1 < static_cast<int>(bands.size()) && y >= bands[b + 1].lo) ++b;
    d.band.push_back(b);
  }
  std::vector<std::vector<int>> members(bands.size());
  for (int i = 0; i < n; ++i) members[d.band[i]].push_back(i);

  const std::string target(kTargetRelation);
  auto name = [&](int i) { return d.entity_names[i]; };
  // Every entity shares a band with itself, so (e, same_band, e) is true
  // and kept in training where the filter sees it.
  std::set<std::pair<int, int>> train_pairs;
  for (int i = 0; i < n; ++i) train_pairs.emplace(i, i);
  for (int i = 0; i < n; ++i) {
    const auto& peers = members[d.band[i]];
    if (peers.size() < 2) continue;
    for (int k = 0; k < opt.train_edges_per_entity; ++k) {
      int j;
      do {
        j = peers[uniform_index(rng, peers.size())];
      } while (j == i);
      train_pairs.emplace(i, j);
    }
  }
  std::vector<std::pair<int, int>> rest;
  for (const auto& peers : members) {
    for (int i : peers) {
      for (int j : peers) {
        if (!train_pairs.count({i, j})) rest.emplace_back(i, j);
      }
    }
  }
  shuffle(rest, rng);
  const std::size_t nvalid =
      std::min<std::size_t>(opt.valid_target_triples, rest.size());
  std::vector<std::pair<int, int>> valid(rest.begin(), rest.begin() + nvalid);
  std::vector<std::pair<int, int>> test(rest.begin() + nvalid, rest.end());
  std::sort(valid.begin(), valid.end());
  std::sort(test.begin(), test.end());
  for (auto [i, j] : train_pairs) d.train.push_back({name(i), target, name(j)});
  for (auto [i, j] : valid) d.valid.push_back({name(i), target, name(j)});
  for (auto [i, j] : test) d.test.push_back({name(i), target, name(j)});

  std::set<std::array<int, 3>> noise;
  while (static_cast<int>(noise.size()) < opt.noise_triples) {
    int s = static_cast<int>(uniform_index(rng, n));
    int o = static_cast<int>(uniform_index(rng, n));
    int r = 1 + static_cast<int>(uniform_index(rng, opt.relations - 1));
    if (s != o) noise.insert({s, r, o});
  }
  for (auto [s, r, o] : noise) {
    d.train.push_back({name(s), fmt::format("rel{:02d}", r), name(o)});
  }

  for (int i = 0; i < n; ++i) {
    int month = 1 + static_cast<int>(uniform_index(rng, 12));
    int day = 1 + static_cast<int>(uniform_index(rng, 28));
    std::array<std::string, 3> row{
        name(i), std::string(kYearAttribute),
        fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.years[i]), month,
                    day)};
    double u = uniform_real(rng);
    if (u < opt.numeric_test_fraction) {
      d.numeric_test.push_back(std::move(row));
    } else if (u < opt.numeric_test_fraction + opt.numeric_valid_fraction) {
      d.numeric_valid.push_back(std::move(row));
    } else {
      d.numeric_train.push_back(std::move(row));
    }
  }
  return d;
}

// Writes train/valid/test and numeric_{train,valid,test} TSVs into dir and
// returns their paths.
inline SplitPaths write(const Dataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto dump = [&](const std::string& file,
                  const std::vector<std::array<std::string, 3>>& rows) {
    auto path = dir / file;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error(fmt::format("cannot write '{}'", path.string()));
    for (const auto& r : rows) out << r[0] << '\t' << r[1] << '\t' << r[2] << '\n';
    return path;
  };
  SplitPaths p;
  p.train = dump("train.tsv", d.train);
  p.valid = dump("valid.tsv", d.valid);
  p.test = dump("test.tsv", d.test);
  p.numeric_train = dump("numeric_train.tsv", d.numeric_train);
  p.numeric_valid = dump("numeric_valid.tsv", d.numeric_valid);
  p.numeric_test = dump("numeric_test.tsv", d.numeric_test);
  return p;
}

}  // namespace kga::synthetic
