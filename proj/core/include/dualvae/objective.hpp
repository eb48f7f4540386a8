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

#include "dualvae/model.hpp"
#include "dualvae/tape.hpp"

namespace dualvae {

struct SideVars {
  EncoderVars encoder;
  DecoderVars decoder;
  Var prototypes;
};

struct ModelVars {
  SideVars user;
  SideVars item;
  const SideVars& side(Side s) const { return s == Side::kUser ? user : item; }
};

// Registers every parameter of both sides as a tape leaf so gradients of the
// frozen side can be inspected.
ModelVars register_params(Tape& tape, const ModelParams& params);

// Inputs of one minibatch of one phase. Everything belonging to the other
// side is a constant.
struct PhaseInputs {
  Side side = Side::kUser;
  const Tensor* slab = nullptr;         // B x N_other train interactions
  const Tensor* other_means = nullptr;  // N_other x (A*d)
  const Tensor* other_probs = nullptr;  // N_other x A
  // One B x d standard-normal tensor per aspect; empty for eval mode.
  std::span<const Tensor> noise;
  double beta = 1.0;
};

struct PhaseGraph {
  Var loss;      // minimized objective, batch-averaged
  Var recon;     // summed Poisson log-likelihood
  Var kl;        // summed KL
  Var vae_loss;  // (-recon + beta * kl) / B
  Var contrast;  // sum of InfoNCE terms / B (constant 0 when disabled)
  Var own_probs;  // B x A
  Var scores;     // B x N_other
  std::vector<Var> z;  // per aspect, B x d
  std::vector<Posterior> posteriors;
  std::vector<bool> eligible;
};

/// Builds the phase objective for one batch.
///
/// The batch's own aspect probabilities come from attention over its
/// current posterior means and prototypes (uniform when that side is
/// ablated); the other side's latents, probabilities and decoder enter as
/// constants.
PhaseGraph build_phase_objective(Tape& tape, const ModelConfig& config, const ModelVars& vars,
                                 const ModelParams& params, const PhaseInputs& inputs);

// ELBO terms for a batch in eval mode (z = mean), with the other side's
// latents and probabilities frozen at the model's stored state.
ElboTerms side_loss(const Model& model, Side side, std::span<const Index> batch,
                    const InteractionMatrix& train);
inline ElboTerms user_side_loss(const Model& model, std::span<const Index> users,
                                const InteractionMatrix& train) {
  return side_loss(model, Side::kUser, users, train);
}
inline ElboTerms item_side_loss(const Model& model, std::span<const Index> items,
                                const InteractionMatrix& train) {
  return side_loss(model, Side::kItem, items, train);
}

}  // namespace dualvae
