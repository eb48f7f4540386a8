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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dualvae/synth.hpp"
#include "support.hpp"

namespace dualvae {
namespace {

struct Fixture {
  InteractionMatrix train;
  Model model;
};

Fixture make_fixture(std::uint64_t seed, std::size_t m = 6, std::size_t n = 9) {
  ModelConfig cfg;
  cfg.aspects = 3;
  cfg.dim = 4;
  cfg.hidden = 5;
  cfg.temp = 0.5;
  Rng rng(seed);
  Fixture f{generate(m, n, 3, 0.3, seed).matrix, Model::init(cfg, m, n, rng)};
  // Move biases off zero so no posterior mean sits at the origin.
  for (Side s : {Side::kUser, Side::kItem}) {
    for (auto& [name, t] : named_params(f.model.params().side(s), s))
      if (name.find(".b") != std::string::npos) *t = rng.normal(t->rows(), t->cols(), 0.3);
  }
  f.model.refresh_means(Side::kUser, f.train);
  f.model.refresh_probs(Side::kUser);
  f.model.refresh_means(Side::kItem, f.train);
  f.model.refresh_probs(Side::kItem);
  return f;
}

Model swap_sides(const Model& m) {
  ModelParams p{m.params().item, m.params().user};
  ModelState s{m.state().item_probs, m.state().user_probs, m.state().item_means,
               m.state().user_means};
  return Model::assemble(m.config(), m.num_items(), m.num_users(), p, s);
}

// Eval-mode ELBO terms of one user built from the tape-free pieces.
ElboTerms plain_user_terms(const Model& model, const InteractionMatrix& train, Index u) {
  const ModelConfig& cfg = model.config();
  const std::size_t A = cfg.aspects, d = cfg.dim, n = model.num_items();
  const auto r = densify(train, Side::kUser, u);
  const Tensor& C = model.state().item_probs;
  Tensor means(1, A * d);
  ElboTerms t;
  for (std::size_t a = 0; a < A; ++a) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = C(i, a);
    auto masked = mask_interactions(r, col);
    Gaussian g = encode(Tensor::row(masked), model.params().user.encoder, d, cfg.logvar_clamp);
    for (std::size_t k = 0; k < d; ++k) means(0, a * d + k) = g.mean[k];
    t.kl += kl_gaussian(g.mean.data(), g.stddev.data());
  }
  Tensor p = aspect_probs(means, model.params().user.prototypes, cfg.temp);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = joint_score(means.row_span(0), model.state().item_means.row_span(i), p.row_span(0),
                         C.row_span(i), model.params().user.decoder,
                         model.params().item.decoder);
    t.recon += poisson_loglik(r[i], s.score);
  }
  return t;
}

TEST(SideLoss, MatchesTapeFreeRecomputation) {
  Fixture f = make_fixture(1);
  for (Index u = 0; u < f.model.num_users(); ++u) {
    std::vector<Index> one{u};
    ElboTerms got = user_side_loss(f.model, one, f.train);
    ElboTerms want = plain_user_terms(f.model, f.train, u);
    EXPECT_NEAR(got.recon, want.recon, 1e-10);
    EXPECT_NEAR(got.kl, want.kl, 1e-10);
  }
  std::vector<Index> all{0, 1, 2, 3, 4, 5};
  ElboTerms batch = user_side_loss(f.model, all, f.train);
  double recon = 0;
  for (Index u : all) recon += plain_user_terms(f.model, f.train, u).recon;
  EXPECT_NEAR(batch.recon, recon, 1e-10);
}

TEST(SideLoss, InactiveUserAgainstNeutralItems) {
  // Zero decoders and zero item means make every skip 0, so g = 0.5 *
  // sum_a p^a c^a = 0.5 / A for uniform probabilities.
  Fixture f = make_fixture(2);
  ModelParams p = f.model.params();
  ModelState s = f.model.state();
  for (Side side : {Side::kUser, Side::kItem}) {
    p.side(side).decoder.w = Tensor(4, 4);
    p.side(side).decoder.b = Tensor(1, 4);
  }
  s.item_means = Tensor(9, 12);
  s.user_probs = uniform_aspect_probs(6, 3);
  s.item_probs = uniform_aspect_probs(9, 3);
  ModelConfig cfg = f.model.config();
  cfg.ablation.no_add = true;
  Model m = Model::assemble(cfg, 6, 9, p, s);
  InteractionMatrix empty(6, 9, {});
  std::vector<Index> u{0};
  ElboTerms t = user_side_loss(m, u, empty);
  EXPECT_NEAR(t.recon, -9.0 * 0.5 / 3.0, 1e-14);
}

TEST(SideLoss, ItemSideEqualsUserSideOfTransposedData) {
  Fixture f = make_fixture(3);
  Model swapped = swap_sides(f.model);
  InteractionMatrix rt = f.train.transposed();
  std::vector<Index> items{0, 2, 3, 7, 8};
  ElboTerms a = item_side_loss(f.model, items, f.train);
  ElboTerms b = user_side_loss(swapped, items, rt);
  EXPECT_NEAR(a.recon, b.recon, 1e-9);
  EXPECT_NEAR(a.kl, b.kl, 1e-9);
}

TEST(PhaseObjective, FrozenSideReceivesExactlyZeroGradient) {
  Fixture f = make_fixture(4);
  Rng rng(9);
  for (Side side : {Side::kUser, Side::kItem}) {
    Batch b{side, {0, 1, 2, 3, 4}};
    Tensor slab = b.slab(f.train);
    std::vector<Tensor> noise;
    for (std::size_t a = 0; a < 3; ++a) noise.push_back(rng.standard_normal(5, 4));
    Tape tape;
    ModelVars vars = register_params(tape, f.model.params());
    PhaseInputs in{side, &slab, &f.model.state().means(other(side)),
                   &f.model.state().probs(other(side)), noise, 1.0};
    PhaseGraph g = build_phase_objective(tape, f.model.config(), vars, f.model.params(), in);
    tape.backward(g.loss);
    auto leaves = [](const SideVars& v) {
      return std::vector<Var>{v.encoder.w1, v.encoder.b1, v.encoder.w2, v.encoder.b2,
                              v.decoder.w,  v.decoder.b,  v.prototypes};
    };
    double own = 0.0;
    for (Var v : leaves(vars.side(side))) {
      const Tensor grad = tape.grad(v);
      for (double x : grad.data()) own = std::max(own, std::abs(x));
    }
    for (Var v : leaves(vars.side(other(side)))) {
      const Tensor grad = tape.grad(v);
      for (double x : grad.data()) EXPECT_EQ(x, 0.0);
    }
    EXPECT_GT(own, 0.0);
  }
}

TEST(PhaseObjective, LossComposition) {
  Fixture f = make_fixture(5);
  Batch b{Side::kUser, {1, 3, 5}};
  Tensor slab = b.slab(f.train);
  for (bool ablate_nrc : {false, true}) {
    ModelConfig cfg = f.model.config();
    cfg.ablation.no_nrc = ablate_nrc;
    Tape tape;
    ModelVars vars = register_params(tape, f.model.params());
    PhaseInputs in{Side::kUser, &slab, &f.model.state().item_means,
                   &f.model.state().item_probs, {}, 0.7};
    PhaseGraph g = build_phase_objective(tape, cfg, vars, f.model.params(), in);
    const double recon = tape.value(g.recon).item(), kl = tape.value(g.kl).item();
    const double vae = (-recon + 0.7 * kl) / 3.0;
    EXPECT_NEAR(tape.value(g.vae_loss).item(), vae, 1e-12);
    const double contrast = tape.value(g.contrast).item();
    if (ablate_nrc) {
      EXPECT_EQ(contrast, 0.0);
    } else {
      EXPECT_GT(contrast, 0.0);
    }
    EXPECT_NEAR(tape.value(g.loss).item(), vae + cfg.effective_gamma() * contrast, 1e-12);
  }
}

TEST(PhaseObjective, AblatedSideUsesUniformProbabilities) {
  Fixture f = make_fixture(6);
  Batch b{Side::kUser, {0, 1}};
  Tensor slab = b.slab(f.train);
  ModelConfig cfg = f.model.config();
  cfg.ablation.no_ud = true;
  Tape tape;
  ModelVars vars = register_params(tape, f.model.params());
  PhaseInputs in{Side::kUser, &slab, &f.model.state().item_means, &f.model.state().item_probs,
                 {}, 1.0};
  PhaseGraph g = build_phase_objective(tape, cfg, vars, f.model.params(), in);
  for (double v : tape.value(g.own_probs).data()) EXPECT_EQ(v, 1.0 / 3);
  for (double v : tape.value(g.scores).data()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

}  // namespace
}  // namespace dualvae
