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

// Every row equal to 1/aspects.
Tensor uniform_aspect_probs(std::size_t rows, std::size_t aspects);

/// Aspect probabilities from prototype attention.
///
/// `means` holds one entity per row with aspect a in columns
/// [a*d, (a+1)*d); `prototypes` is aspects x d. Row r of the result is
/// softmax_a(cos(means_r^a, prototype_a) / temp). A zero-norm latent or
/// prototype contributes cosine 0. temp must be positive.
Tensor aspect_probs(const Tensor& means, const Tensor& prototypes, double temp);

// C from item posterior means and item prototypes H.
inline Tensor item_aspect_probs(const Tensor& item_means, const Tensor& item_prototypes,
                                double temp) {
  return aspect_probs(item_means, item_prototypes, temp);
}
// P from user posterior means and user prototypes M.
inline Tensor user_aspect_probs(const Tensor& user_means, const Tensor& user_prototypes,
                                double temp) {
  return aspect_probs(user_means, user_prototypes, temp);
}

// Differentiable form over per-aspect mean blocks (each rows x d). Returns
// rows x aspects.
Var aspect_probs(Tape& tape, std::span<const Var> aspect_means, Var prototypes, double temp);

struct AspectReport {
  std::vector<double> entropy;     // nats, in [0, ln A]
  std::vector<std::size_t> argmax;  // ties go to the lowest aspect index
};

AspectReport aspect_entropy_report(const Tensor& probs);

}  // namespace dualvae
