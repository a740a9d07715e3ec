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

// Central finite-difference check of example_loss against its analytic
// gradient.

#include <algorithm>
#include <cmath>
#include <vector>

#include "kga/embedder.hpp"

namespace kga::testing {

struct GradCheckResult {
  // ||analytic - numeric|| / max(||analytic||, ||numeric||) over every
  // coordinate of every touched row.
  double rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

// Perturbs every coordinate of every row the example touches.
inline GradCheckResult grad_check(EmbeddingModel& m, const EntityTriple& pos,
                                  const std::vector<EntityTriple>& negs,
                                  double h = 1e-5) {
  SparseGrad g(m.width());
  example_loss(m, pos, negs, &g);
  GradCheckResult r;
  double diff2 = 0, a2 = 0, n2 = 0;
  auto check_rows = [&](const SparseGrad::Rows& rows, std::vector<double>& table) {
    for (std::size_t k = 0; k < rows.ids.size(); ++k) {
      for (int j = 0; j < m.width(); ++j) {
        const std::size_t idx = static_cast<std::size_t>(rows.ids[k]) * m.width() + j;
        const double analytic = rows.values[k * m.width() + j];
        const double saved = table[idx];
        table[idx] = saved + h;
        const double up = example_loss(m, pos, negs, nullptr);
        table[idx] = saved - h;
        const double down = example_loss(m, pos, negs, nullptr);
        table[idx] = saved;
        const double numeric = (up - down) / (2 * h);
        ++r.checked;
        diff2 += (analytic - numeric) * (analytic - numeric);
        a2 += analytic * analytic;
        n2 += numeric * numeric;
        r.max_abs_error = std::max(r.max_abs_error, std::fabs(analytic - numeric));
      }
    }
  };
  check_rows(g.entities(), m.entity_table());
  check_rows(g.relations(), m.relation_table());
  const double scale = std::sqrt(std::max(a2, n2));
  r.rel_error = scale > 0 ? std::sqrt(diff2) / scale : 0.0;
  return r;
}

}  // namespace kga::testing
