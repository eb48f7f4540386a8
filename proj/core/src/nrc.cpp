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

#include "dualvae/nrc.hpp"

#include <cmath>

#include "dualvae/dvi.hpp"
#include "dualvae/errors.hpp"

namespace dualvae {

namespace {

Tensor column_block(const Tensor& t, std::size_t start, std::size_t count) {
  Tensor out(t.rows(), count);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = t(r, start + c);
  }
  return out;
}

Tensor normalized_rows(const Tensor& t) {
  Tensor out = t;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row_span(r);
    double n2 = 0.0;
    for (double v : row) n2 += v * v;
    if (n2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(n2);
    for (double& v : row) v *= inv;
  }
  return out;
}

}  // namespace

std::vector<double> neighborhood_repr(std::span<const Index> neighbors, std::size_t aspect,
                                      const Tensor& means, const Tensor& probs,
                                      std::size_t dim) {
  if (aspect >= probs.cols() || means.cols() < (aspect + 1) * dim) {
    throw DimensionError("aspect out of range for neighborhood representation");
  }
  std::vector<double> o(dim, 0.0);
  for (Index j : neighbors) {
    const double w = probs(j, aspect);
    for (std::size_t k = 0; k < dim; ++k) o[k] += w * means(j, aspect * dim + k);
  }
  return o;
}

std::vector<Tensor> neighborhood_reprs(const Tensor& slab, const Tensor& other_probs,
                                       const Tensor& other_means, std::size_t aspects,
                                       std::size_t dim) {
  if (other_means.cols() != aspects * dim || other_means.rows() != slab.cols()) {
    throw DimensionError("other-side means do not match the slab");
  }
  std::vector<Tensor> out;
  out.reserve(aspects);
  for (std::size_t a = 0; a < aspects; ++a) {
    out.push_back(matmul(mask_slab(slab, other_probs, a), column_block(other_means, a * dim, dim)));
  }
  return out;
}

Tensor contrast_mask(std::size_t aspects, std::size_t batch, const std::vector<bool>& eligible,
                     const ContrastConfig& cfg) {
  if (eligible.size() != batch) throw DimensionError("eligibility must cover the batch");
  const std::size_t n = aspects * batch;
  Tensor mask(n, n + 1, 0.0);
  for (std::size_t a = 0; a < aspects; ++a) {
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t row = a * batch + b;
      mask(row, 0) = 1.0;
      if (!eligible[b]) continue;
      if (cfg.use_aspect_negs) {
        for (std::size_t a2 = 0; a2 < aspects; ++a2) {
          if (a2 != a) mask(row, 1 + a2 * batch + b) = 1.0;
        }
      }
      if (cfg.use_user_negs) {
        for (std::size_t b2 = 0; b2 < batch; ++b2) {
          if (b2 != b && eligible[b2]) mask(row, 1 + a * batch + b2) = 1.0;
        }
      }
    }
  }
  return mask;
}

Var contrastive_terms(Tape& tape, std::span<const Var> z, std::span<const Tensor> o,
                      const std::vector<bool>& eligible, const ContrastConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw DomainError("contrastive temperature must be positive");
  const std::size_t aspects = z.size();
  if (aspects == 0 || o.size() != aspects) throw DimensionError("z and o disagree on aspects");
  const std::size_t batch = tape.value(z[0]).rows();

  std::vector<Var> zn;
  std::vector<Tensor> on;
  for (std::size_t a = 0; a < aspects; ++a) {
    if (!tape.value(z[a]).same_shape(o[a])) throw DimensionError("z and o differ in shape");
    zn.push_back(tape.normalize_rows(z[a]));
    on.push_back(normalized_rows(o[a]));
  }
  Var zs = tape.concat_rows(zn);
  std::vector<Var> on_vars;
  for (auto& t : on) on_vars.push_back(tape.constant(std::move(t)));
  Var os = tape.concat_rows(on_vars);

  Var sims = tape.matmul(zs, os, false, true);
  Var pos = cfg.use_neighbor_pos ? tape.dot_rows(zs, os) : tape.dot_rows(zs, zs);
  const Var parts[] = {pos, sims};
  Var logits = tape.scale(tape.concat_cols(parts), 1.0 / cfg.tau);
  Var lse = tape.masked_logsumexp_rows(logits, contrast_mask(aspects, batch, eligible, cfg));
  return tape.sub(lse, tape.scale(pos, 1.0 / cfg.tau));
}

double infonce(std::span<const Tensor> z, std::span<const Tensor> o,
               const std::vector<bool>& eligible, std::size_t entity, std::size_t aspect,
               const ContrastConfig& cfg) {
  Tape tape;
  std::vector<Var> zv;
  for (const auto& t : z) zv.push_back(tape.constant(t));
  Var terms = contrastive_terms(tape, zv, o, eligible, cfg);
  const std::size_t batch = z.empty() ? 0 : z[0].rows();
  if (entity >= batch || aspect >= z.size()) throw DimensionError("anchor out of range");
  return tape.value(terms)(aspect * batch + entity, 0);
}

double total_loss(double vae_loss, double contrast, double gamma) {
  return vae_loss + gamma * contrast;
}

Var total_loss(Tape& tape, Var vae_loss, Var contrast, double gamma) {
  return tape.add(vae_loss, tape.scale(contrast, gamma));
}

}  // namespace dualvae
