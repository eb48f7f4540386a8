// Copyright 2026 The dualvae Authors.
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

#include "dualvae/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dualvae/errors.hpp"
#include "dualvae/rng.hpp"

namespace dualvae {

namespace {

Tensor draw_mixtures(std::size_t count, std::size_t aspects, MixtureKind kind, Rng& rng) {
  Tensor mix(count, aspects);
  if (kind == MixtureKind::kOneHot) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t k = 0; k < count; ++k) mix(order[k], k % aspects) = 1.0;
    return mix;
  }
  for (std::size_t r = 0; r < count; ++r) {
    double total = 0.0;
    for (std::size_t a = 0; a < aspects; ++a) {
      mix(r, a) = -std::log1p(-rng.uniform());
      total += mix(r, a);
    }
    for (std::size_t a = 0; a < aspects; ++a) mix(r, a) /= total;
  }
  return mix;
}

std::vector<std::size_t> argmax_rows(const Tensor& t) {
  std::vector<std::size_t> out(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto row = t.row_span(r);
    out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace

SynthData generate(std::size_t num_users, std::size_t num_items, std::size_t aspects,
                   double density, std::uint64_t seed, MixtureKind kind) {
  if (!(density > 0.0 && density < 1.0)) throw DomainError("density must lie in (0, 1)");
  if (aspects == 0 || num_users == 0 || num_items == 0) {
    throw DimensionError("synthetic world needs users, items and aspects");
  }
  Rng rng(seed);
  SynthData out;
  PlantedWorld& w = out.world;
  w.aspects = aspects;
  w.seed = seed;
  w.user_mix = draw_mixtures(num_users, aspects, kind, rng);
  w.item_mix = draw_mixtures(num_items, aspects, kind, rng);
  w.user_aspect = argmax_rows(w.user_mix);
  w.item_aspect = argmax_rows(w.item_mix);

  const double scale = density * static_cast<double>(aspects);
  std::vector<Pair> pairs;
  for (std::size_t u = 0; u < num_users; ++u) {
    auto mu = w.user_mix.row_span(u);
    for (std::size_t i = 0; i < num_items; ++i) {
      auto mi = w.item_mix.row_span(i);
      double dot = 0.0;
      for (std::size_t a = 0; a < aspects; ++a) dot += mu[a] * mi[a];
      const double p = std::min(1.0, scale * dot);
      if (rng.uniform() < p) pairs.emplace_back(static_cast<Index>(u), static_cast<Index>(i));
    }
  }
  out.matrix = InteractionMatrix(num_users, num_items, std::move(pairs));
  return out;
}

double block_density_ratio(const InteractionMatrix& matrix, const PlantedWorld& world) {
  std::vector<double> users_per(world.aspects, 0.0), items_per(world.aspects, 0.0);
  for (auto a : world.user_aspect) users_per[a] += 1.0;
  for (auto a : world.item_aspect) items_per[a] += 1.0;
  double within_pairs = 0.0;
  for (std::size_t a = 0; a < world.aspects; ++a) within_pairs += users_per[a] * items_per[a];
  const double all_pairs =
      static_cast<double>(matrix.num_users()) * static_cast<double>(matrix.num_items());
  double within = 0.0, cross = 0.0;
  for (const auto& [u, i] : matrix.pairs()) {
    (world.user_aspect[u] == world.item_aspect[i] ? within : cross) += 1.0;
  }
  const double cross_pairs = all_pairs - within_pairs;
  if (cross == 0.0 || cross_pairs == 0.0) return std::numeric_limits<double>::infinity();
  return (within / within_pairs) / (cross / cross_pairs);
}

std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  // Shortest augmenting path Hungarian method on cost = -weight, 1-based
  // potentials u, v and column owners p.
  const std::size_t n = weight.size();
  for (const auto& row : weight) {
    if (row.size() != n) throw DimensionError("assignment matrix must be square");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

double aspect_recovery_score(std::span<const std::size_t> learned,
                             std::span<const std::size_t> planted, std::size_t num_labels) {
  if (learned.size() != planted.size()) throw DimensionError("label vectors differ in length");
  if (learned.empty()) throw DomainError("no entities to score");
  const std::size_t k = num_labels;
  std::vector<std::vector<double>> table(k, std::vector<double>(k, 0.0));
  for (std::size_t e = 0; e < learned.size(); ++e) {
    if (learned[e] >= k || planted[e] >= k) throw DimensionError("label out of range");
    table[learned[e]][planted[e]] += 1.0;
  }
  const auto match = max_weight_assignment(table);
  const double n = static_cast<double>(learned.size());
  double agree = 0.0, expected = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    agree += table[a][match[a]];
    double row = 0.0, col = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      row += table[a][b];
      col += table[b][match[a]];
    }
    expected += row * col;
  }
  const double po = agree / n;
  const double pe = expected / (n * n);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

}  // namespace dualvae
