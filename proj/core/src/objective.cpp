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

#include "dualvae/objective.hpp"

#include "dualvae/errors.hpp"

namespace dualvae {

namespace {

SideVars register_side(Tape& tape, const SideParams& p) {
  SideVars v;
  v.encoder = {tape.parameter(p.encoder.w1), tape.parameter(p.encoder.b1),
               tape.parameter(p.encoder.w2), tape.parameter(p.encoder.b2)};
  v.decoder = {tape.parameter(p.decoder.w), tape.parameter(p.decoder.b)};
  v.prototypes = tape.parameter(p.prototypes);
  return v;
}

Tensor column_block(const Tensor& t, std::size_t start, std::size_t count) {
  Tensor out(t.rows(), count);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = t(r, start + c);
  }
  return out;
}

}  // namespace

ModelVars register_params(Tape& tape, const ModelParams& params) {
  ModelVars v;
  v.user = register_side(tape, params.user);
  v.item = register_side(tape, params.item);
  return v;
}

PhaseGraph build_phase_objective(Tape& tape, const ModelConfig& config, const ModelVars& vars,
                                 const ModelParams& params, const PhaseInputs& in) {
  if (in.slab == nullptr || in.other_means == nullptr || in.other_probs == nullptr) {
    throw ContractError("phase inputs are incomplete");
  }
  const Tensor& slab = *in.slab;
  const std::size_t A = config.aspects, d = config.dim, B = slab.rows();
  if (B == 0) throw DimensionError("empty batch");
  if (!in.noise.empty() && in.noise.size() != A) throw DimensionError("one noise block per aspect");
  const SideVars& own = vars.side(in.side);
  const DecoderParams& other_dec = params.side(other(in.side)).decoder;

  PhaseGraph g;
  g.eligible.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    bool any = false;
    for (double v : slab.row_span(b)) any = any || v != 0.0;
    g.eligible[b] = any;
  }

  std::vector<Var> mean_blocks;
  for (std::size_t a = 0; a < A; ++a) {
    Var masked = tape.constant(mask_slab(slab, *in.other_probs, a));
    g.posteriors.push_back(encode(tape, masked, own.encoder, d, config.logvar_clamp));
    mean_blocks.push_back(g.posteriors.back().mean);
    g.z.push_back(reparameterize(tape, g.posteriors.back(),
                                 in.noise.empty() ? Tensor() : in.noise[a]));
  }
  g.own_probs = config.disentangled(in.side)
                    ? aspect_probs(tape, mean_blocks, own.prototypes, config.temp)
                    : tape.constant(uniform_aspect_probs(B, A));

  Var other_probs_t = tape.constant(in.other_probs->transposed());
  std::vector<Var> skips;
  for (std::size_t a = 0; a < A; ++a) {
    const Tensor z_other = column_block(*in.other_means, a * d, d);
    Var f_other = tape.constant(decode(z_other, other_dec));
    Var f_own = decode(tape, g.z[a], own.decoder);
    skips.push_back(skip_scores(tape, g.z[a], f_own, tape.constant(z_other), f_other));
  }
  g.scores = joint_scores(tape, skips, g.own_probs, other_probs_t);
  g.recon = poisson_loglik(tape, slab, g.scores);

  g.kl = kl_gaussian(tape, g.posteriors[0]);
  for (std::size_t a = 1; a < A; ++a) g.kl = tape.add(g.kl, kl_gaussian(tape, g.posteriors[a]));

  const double inv_b = 1.0 / static_cast<double>(B);
  g.vae_loss = tape.scale(tape.sub(tape.scale(g.kl, in.beta), g.recon), inv_b);

  const ContrastConfig cc = config.contrast();
  if (cc.gamma > 0.0) {
    const auto o = neighborhood_reprs(slab, *in.other_probs, *in.other_means, A, d);
    Var terms = contrastive_terms(tape, g.z, o, g.eligible, cc);
    g.contrast = tape.scale(tape.sum(terms), inv_b);
    g.loss = total_loss(tape, g.vae_loss, g.contrast, cc.gamma);
  } else {
    g.contrast = tape.constant(Tensor::scalar(0.0));
    g.loss = g.vae_loss;
  }
  return g;
}

ElboTerms side_loss(const Model& model, Side side, std::span<const Index> batch,
                    const InteractionMatrix& train) {
  Batch b{side, {batch.begin(), batch.end()}};
  const Tensor slab = b.slab(train);
  Tape tape;
  ModelVars vars = register_params(tape, model.params());
  PhaseInputs in;
  in.side = side;
  in.slab = &slab;
  in.other_means = &model.state().means(other(side));
  in.other_probs = &model.state().probs(other(side));
  in.beta = model.config().beta;
  PhaseGraph g = build_phase_objective(tape, model.config(), vars, model.params(), in);
  ElboTerms t;
  t.recon = tape.value(g.recon).item();
  t.kl = tape.value(g.kl).item();
  t.beta = in.beta;
  return t;
}

}  // namespace dualvae
