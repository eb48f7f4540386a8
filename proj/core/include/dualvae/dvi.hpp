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

// One-hidden-layer encoder: input -> tanh(x W1 + b1) -> [mean; logvar].
// The same encoder serves every aspect of its side.
struct EncoderParams {
  Tensor w1;  // input x hidden
  Tensor b1;  // 1 x hidden
  Tensor w2;  // hidden x 2d
  Tensor b2;  // 1 x 2d
};

struct EncoderVars {
  Var w1, b1, w2, b2;
};

// Per-aspect Gaussian posterior over a batch, rows x d each.
struct Posterior {
  Var mean;
  Var logvar;  // clamped to [-clamp, clamp]
};

// r (x) aspect column: elementwise product of an interaction vector with the
// other side's probabilities for one aspect.
std::vector<double> mask_interactions(std::span<const double> interactions,
                                      std::span<const double> aspect_column);

// Batched masking: slab (rows x N) times column `aspect` of `other_probs`
// (N x A), broadcast over rows.
Tensor mask_slab(const Tensor& slab, const Tensor& other_probs, std::size_t aspect);

Posterior encode(Tape& tape, Var masked, const EncoderVars& enc, std::size_t dim,
                 double logvar_clamp);

struct Gaussian {
  Tensor mean;
  Tensor stddev;  // exp(logvar / 2)
};

// Tape-free evaluation of the encoder on a constant input.
Gaussian encode(const Tensor& masked, const EncoderParams& enc, std::size_t dim,
                double logvar_clamp);

// z = mean + exp(logvar/2) * noise. An empty noise tensor is evaluation mode
// (z = mean).
Var reparameterize(Tape& tape, const Posterior& post, const Tensor& noise);
Tensor reparameterize(const Tensor& mean, const Tensor& stddev, const Tensor& noise);

// KL(N(mean, diag(exp(logvar))) || N(0, I)) summed over all rows and dims.
Var kl_gaussian(Tape& tape, const Posterior& post);
// Closed form 1/2 sum(sigma^2 + mu^2 - 1 - ln sigma^2); sigma must be > 0.
double kl_gaussian(std::span<const double> mean, std::span<const double> stddev);

}  // namespace dualvae
