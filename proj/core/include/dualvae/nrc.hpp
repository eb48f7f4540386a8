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
#include <span>
#include <vector>

#include "dualvae/data.hpp"
#include "dualvae/tape.hpp"
#include "dualvae/tensor.hpp"

namespace dualvae {

struct ContrastConfig {
  double tau = 0.2;
  double gamma = 0.1;
  bool use_user_negs = true;    // entity-level negatives (other batch members)
  bool use_aspect_negs = true;  // other aspects of the same entity
  bool use_neighbor_pos = true;  // false: the anchor is its own positive
};

// o^a = sum_{j in N(e)} probs_j^a z_j^a for one entity and aspect. `means`
// has aspect blocks of width `dim`.
std::vector<double> neighborhood_repr(std::span<const Index> neighbors, std::size_t aspect,
                                      const Tensor& means, const Tensor& probs,
                                      std::size_t dim);

// o^a for every row of a dense neighbor slab (rows x N), one rows x d tensor
// per aspect.
std::vector<Tensor> neighborhood_reprs(const Tensor& slab, const Tensor& other_probs,
                                       const Tensor& other_means, std::size_t aspects,
                                       std::size_t dim);

/// Denominator mask for the batched InfoNCE logits.
///
/// Rows are anchors (a, b) at index a*B + b. Column 0 is the positive;
/// column 1 + (a'*B + b') is the similarity to o^{a'}_{b'}. Kept entries:
/// the positive, aspect negatives (b' == b, a' != a) and entity negatives
/// (a' == a, b' != b), subject to the flags. Anchors and negatives whose
/// entity is not eligible (empty neighborhood) are dropped; an ineligible
/// anchor keeps only its positive, so its loss is exactly zero.
Tensor contrast_mask(std::size_t aspects, std::size_t batch, const std::vector<bool>& eligible,
                     const ContrastConfig& cfg);

/// Per-anchor InfoNCE losses, (A*B) x 1, with cosine similarity and
/// temperature tau. `z` and `o` hold one B x d block per aspect; `o` is
/// constant within a phase.
Var contrastive_terms(Tape& tape, std::span<const Var> z, std::span<const Tensor> o,
                      const std::vector<bool>& eligible, const ContrastConfig& cfg);

// Loss of a single anchor (entity row `entity`, aspect `aspect`) of a batch.
double infonce(std::span<const Tensor> z, std::span<const Tensor> o,
               const std::vector<bool>& eligible, std::size_t entity, std::size_t aspect,
               const ContrastConfig& cfg);
inline double infonce_user(std::span<const Tensor> z, std::span<const Tensor> o,
                           const std::vector<bool>& eligible, std::size_t user,
                           std::size_t aspect, const ContrastConfig& cfg) {
  return infonce(z, o, eligible, user, aspect, cfg);
}
inline double infonce_item(std::span<const Tensor> z, std::span<const Tensor> o,
                           const std::vector<bool>& eligible, std::size_t item,
                           std::size_t aspect, const ContrastConfig& cfg) {
  return infonce(z, o, eligible, item, aspect, cfg);
}

// L = vae_loss + gamma * contrast, both already batch-averaged.
double total_loss(double vae_loss, double contrast, double gamma);
Var total_loss(Tape& tape, Var vae_loss, Var contrast, double gamma);

}  // namespace dualvae
