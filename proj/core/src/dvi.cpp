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

#include "dualvae/dvi.hpp"

#include <cmath>

#include "dualvae/errors.hpp"

namespace dualvae {

std::vector<double> mask_interactions(std::span<const double> interactions,
                                      std::span<const double> aspect_column) {
  if (interactions.size() != aspect_column.size()) {
    throw DimensionError("interaction vector and aspect column differ in length");
  }
  std::vector<double> out(interactions.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = interactions[j] * aspect_column[j];
  return out;
}

Tensor mask_slab(const Tensor& slab, const Tensor& other_probs, std::size_t aspect) {
  if (slab.cols() != other_probs.rows() || aspect >= other_probs.cols()) {
    throw DimensionError("slab columns must match the other side's probability rows");
  }
  Tensor out(slab.rows(), slab.cols());
  for (std::size_t r = 0; r < slab.rows(); ++r) {
    auto in = slab.row_span(r);
    auto dst = out.row_span(r);
    for (std::size_t j = 0; j < in.size(); ++j) {
      if (in[j] != 0.0) dst[j] = in[j] * other_probs(j, aspect);
    }
  }
  return out;
}

Posterior encode(Tape& tape, Var masked, const EncoderVars& enc, std::size_t dim,
                 double logvar_clamp) {
  Var hidden = tape.tanh(tape.add(tape.matmul(masked, enc.w1), enc.b1));
  Var out = tape.add(tape.matmul(hidden, enc.w2), enc.b2);
  if (tape.value(out).cols() != 2 * dim) throw DimensionError("encoder output must be 2 * dim");
  Posterior post;
  post.mean = tape.slice_cols(out, 0, dim);
  post.logvar = tape.clamp(tape.slice_cols(out, dim, dim), -logvar_clamp, logvar_clamp);
  return post;
}

Gaussian encode(const Tensor& masked, const EncoderParams& enc, std::size_t dim,
                double logvar_clamp) {
  Tensor hidden = matmul(masked, enc.w1);
  for (std::size_t r = 0; r < hidden.rows(); ++r) {
    auto row = hidden.row_span(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = std::tanh(row[c] + enc.b1[c]);
  }
  Tensor out = matmul(hidden, enc.w2);
  if (out.cols() != 2 * dim) throw DimensionError("encoder output must be 2 * dim");
  Gaussian g{Tensor(out.rows(), dim), Tensor(out.rows(), dim)};
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t k = 0; k < dim; ++k) {
      g.mean(r, k) = out(r, k) + enc.b2[k];
      double lv = out(r, dim + k) + enc.b2[dim + k];
      lv = std::min(std::max(lv, -logvar_clamp), logvar_clamp);
      g.stddev(r, k) = std::exp(0.5 * lv);
    }
  }
  return g;
}

Var reparameterize(Tape& tape, const Posterior& post, const Tensor& noise) {
  if (noise.empty()) return post.mean;
  Var stddev = tape.exp(tape.scale(post.logvar, 0.5));
  return tape.add(post.mean, tape.mul(stddev, tape.constant(noise)));
}

Tensor reparameterize(const Tensor& mean, const Tensor& stddev, const Tensor& noise) {
  if (!mean.same_shape(stddev) || !mean.same_shape(noise)) {
    throw DimensionError("reparameterize operands differ in shape");
  }
  Tensor z(mean.rows(), mean.cols());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mean[i] + stddev[i] * noise[i];
  return z;
}

Var kl_gaussian(Tape& tape, const Posterior& post) {
  // 1/2 sum(exp(lv) + mu^2 - 1 - lv)
  Var var = tape.exp(post.logvar);
  Var mu2 = tape.mul(post.mean, post.mean);
  Var inner = tape.sub(tape.add(var, mu2), tape.affine(post.logvar, 1.0, 1.0));
  return tape.scale(tape.sum(inner), 0.5);
}

double kl_gaussian(std::span<const double> mean, std::span<const double> stddev) {
  if (mean.size() != stddev.size()) throw DimensionError("mean and stddev differ in length");
  double kl = 0.0;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    if (!(stddev[k] > 0.0)) throw DomainError("stddev must be positive");
    const double var = stddev[k] * stddev[k];
    kl += var + mean[k] * mean[k] - 1.0 - std::log(var);
  }
  return 0.5 * kl;
}

}  // namespace dualvae
