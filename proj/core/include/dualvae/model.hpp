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
#include <string>
#include <utility>
#include <vector>

#include "dualvae/add.hpp"
#include "dualvae/data.hpp"
#include "dualvae/dvi.hpp"
#include "dualvae/jg.hpp"
#include "dualvae/nrc.hpp"
#include "dualvae/rng.hpp"
#include "dualvae/tensor.hpp"

namespace dualvae {

// Structural ablations. Each flag removes one component from the full model.
struct AblationFlags {
  bool no_add = false;  // C and P pinned uniform
  bool no_ud = false;   // user-side probabilities P pinned uniform
  bool no_id = false;   // item-side probabilities C pinned uniform
  bool no_nrc = false;  // contrastive term dropped
  bool no_uns = false;  // no entity-level negatives
  bool no_ans = false;  // no aspect-level negatives
  bool no_nps = false;  // anchor is its own positive

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

// Comma-separated flag names, e.g. "no_add,no_nrc". Empty means none.
AblationFlags parse_ablation(const std::string& list);
std::string format_ablation(const AblationFlags& flags);

struct ModelConfig {
  std::size_t aspects = 4;
  std::size_t dim = 25;  // per aspect
  std::size_t hidden = 64;
  double temp = 0.1;      // aspect attention softmax temperature
  double tau = 0.2;       // contrastive temperature
  double gamma = 0.1;     // contrastive weight
  double beta = 1.0;      // KL weight
  double logvar_clamp = 10.0;
  AblationFlags ablation;

  // Whether P (user side) or C (item side) follows the learned attention.
  bool disentangled(Side side) const;
  double effective_gamma() const { return ablation.no_nrc ? 0.0 : gamma; }
  ContrastConfig contrast() const;
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct SideParams {
  EncoderParams encoder;
  DecoderParams decoder;
  Tensor prototypes;  // aspects x dim; M for users, H for items
};

struct ModelParams {
  SideParams user;
  SideParams item;

  SideParams& side(Side s) { return s == Side::kUser ? user : item; }
  const SideParams& side(Side s) const { return s == Side::kUser ? user : item; }
};

// Named parameter tensors of one side in a fixed order, e.g.
// "user.encoder.w1".
std::vector<std::pair<std::string, Tensor*>> named_params(SideParams& params, Side side);
std::vector<std::pair<std::string, const Tensor*>> named_params(const SideParams& params,
                                                                Side side);

// Snapshot quantities that change only at phase boundaries.
struct ModelState {
  Tensor user_probs;  // P, m x A
  Tensor item_probs;  // C, n x A
  Tensor user_means;  // m x (A*d), eval-mode posterior means
  Tensor item_means;  // n x (A*d)

  Tensor& probs(Side s) { return s == Side::kUser ? user_probs : item_probs; }
  const Tensor& probs(Side s) const { return s == Side::kUser ? user_probs : item_probs; }
  Tensor& means(Side s) { return s == Side::kUser ? user_means : item_means; }
  const Tensor& means(Side s) const { return s == Side::kUser ? user_means : item_means; }
};

class Model {
 public:
  Model() = default;

  // Random parameters (Glorot-normal weights, zero biases, N(0, 1/d)
  // prototypes), uniform C and P, zero means.
  static Model init(const ModelConfig& config, std::size_t num_users, std::size_t num_items,
                    Rng& rng);

  const ModelConfig& config() const { return config_; }
  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t count(Side s) const { return s == Side::kUser ? num_users_ : num_items_; }

  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  ModelState& state() { return state_; }
  const ModelState& state() const { return state_; }

  // Eval-mode scores of the given users against every item, |users| x n.
  Tensor score_users(std::span<const Index> users) const;
  // Eval-mode score of one pair with its per-aspect addends.
  ScoreBreakdown explain(Index user, Index item) const;

  // Re-encodes every entity of `side` from `train` in eval mode, masking with
  // the other side's current probabilities.
  void refresh_means(Side side, const InteractionMatrix& train);
  // Recomputes the stored probabilities of `side` from its current means and
  // prototypes, or resets them to uniform when that side is ablated.
  void refresh_probs(Side side);

  // Rebuilds a model from stored pieces; shapes are validated.
  static Model assemble(const ModelConfig& config, std::size_t num_users, std::size_t num_items,
                        ModelParams params, ModelState state);

 private:
  ModelConfig config_;
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  ModelParams params_;
  ModelState state_;
};

}  // namespace dualvae
