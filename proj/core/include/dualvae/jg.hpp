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

#include "dualvae/tape.hpp"
#include "dualvae/tensor.hpp"

namespace dualvae {

// Nonlinear map f(z) = tanh(z W + b), d -> d. One per side, shared across
// aspects.
struct DecoderParams {
  Tensor w;  // d x d
  Tensor b;  // 1 x d
};

struct DecoderVars {
  Var w, b;
};

Var decode(Tape& tape, Var z, const DecoderVars& dec);
Tensor decode(const Tensor& z, const DecoderParams& dec);

// <z_u, z_i> + <f_u(z_u), f_i(z_i)>
double skip_score(std::span<const double> z_user, std::span<const double> z_item,
                  const DecoderParams& user_dec, const DecoderParams& item_dec);

// All-pairs skip scores between the rows of two latent blocks:
// z_own z_other^T + f_own f_other^T.
Var skip_scores(Tape& tape, Var z_own, Var f_own, Var z_other, Var f_other);

// g = sum_a own_probs[:, a] other_probs[:, a]^T (x) sigmoid(skips[a]).
// `own_probs` is rows x A, `other_probs_t` is the other side's A x N
// probability matrix (already transposed).
Var joint_scores(Tape& tape, std::span<const Var> skips, Var own_probs, Var other_probs_t);

struct ScoreBreakdown {
  double score = 0.0;
  std::vector<double> addends;  // p_u^a c_i^a sigmoid(skip^a); sums to score
};

// Score of one pair from concatenated per-aspect latents (A*d each) and
// probability rows.
ScoreBreakdown joint_score(std::span<const double> z_user, std::span<const double> z_item,
                           std::span<const double> user_probs,
                           std::span<const double> item_probs, const DecoderParams& user_dec,
                           const DecoderParams& item_dec);

// Poisson log-likelihood of a binary observation, r ln g - g. g must be > 0.
double poisson_loglik(double r, double g);
// Summed over all entries; ln g is only taken where r != 0.
Var poisson_loglik(Tape& tape, const Tensor& r, Var g);

struct ElboTerms {
  double recon = 0.0;  // summed Poisson log-likelihood
  double kl = 0.0;
  double beta = 1.0;
  double elbo() const { return recon - beta * kl; }
};

}  // namespace dualvae
