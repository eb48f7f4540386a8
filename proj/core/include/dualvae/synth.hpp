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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dualvae/data.hpp"
#include "dualvae/tensor.hpp"

namespace dualvae {

enum class MixtureKind {
  kOneHot,     // every entity belongs to exactly one aspect, balanced
  kDirichlet,  // flat Dirichlet mixed membership
};

struct PlantedWorld {
  std::size_t aspects = 0;
  Tensor user_mix;  // m x A*, rows on the simplex
  Tensor item_mix;  // n x A*
  std::vector<std::size_t> user_aspect;  // argmax of each mixture row
  std::vector<std::size_t> item_aspect;
  std::uint64_t seed = 0;
};

struct SynthData {
  InteractionMatrix matrix;
  PlantedWorld world;
};

/// Bernoulli interactions with p(u, i) = min(1, density * A* * <mix_u, mix_i>).
/// With one-hot mixtures this is density * A* inside a block and 0 outside,
/// so the expected overall density is `density`.
SynthData generate(std::size_t num_users, std::size_t num_items, std::size_t aspects,
                   double density, std::uint64_t seed,
                   MixtureKind kind = MixtureKind::kOneHot);

// Observed density of same-aspect pairs divided by that of cross-aspect
// pairs (infinity when no cross-aspect pair interacts).
double block_density_ratio(const InteractionMatrix& matrix, const PlantedWorld& world);

// Maximum-weight perfect matching on a square matrix; result[row] = column.
std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<double>>& weight);

/// Agreement between learned and planted labels after relabeling the
/// learned aspects by the best one-to-one matching of their contingency
/// table, scored as Cohen's kappa: 1 for identical partitions up to
/// permutation, about 0 for independent labels.
double aspect_recovery_score(std::span<const std::size_t> learned,
                             std::span<const std::size_t> planted, std::size_t num_labels);

}  // namespace dualvae
