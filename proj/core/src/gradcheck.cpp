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

#include "dualvae/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dualvae/add.hpp"
#include "dualvae/errors.hpp"
#include "dualvae/objective.hpp"
#include "dualvae/rng.hpp"

namespace dualvae {

namespace {

Tensor random_simplex(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t = rng.standard_normal(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = t.row_span(r);
    double total = 0.0;
    for (double& v : row) total += (v = std::exp(v));
    for (double& v : row) v /= total;
  }
  return t;
}

struct Instance {
  ModelConfig config;
  Model model;
  InteractionMatrix train;
  std::vector<Tensor> user_noise;
  std::vector<Tensor> item_noise;
};

Instance make_instance(const GradcheckOptions& o) {
  Rng rng(o.seed);
  Instance inst;
  inst.config.aspects = o.aspects;
  inst.config.dim = o.dim;
  inst.config.hidden = o.hidden;
  inst.config.gamma = o.gamma;
  std::vector<Pair> pairs;
  for (std::size_t u = 0; u < o.users; ++u) {
    for (std::size_t i = 0; i < o.items; ++i) {
      if (rng.uniform() < o.density) pairs.emplace_back(static_cast<Index>(u), static_cast<Index>(i));
    }
  }
  inst.train = InteractionMatrix(o.users, o.items, std::move(pairs));
  inst.model = Model::init(inst.config, o.users, o.items, rng);
  // Zero biases put entities without interactions at mean = 0, where cosine
  // attention is discontinuous; move off that point.
  for (Side side : {Side::kUser, Side::kItem}) {
    SideParams& p = inst.model.params().side(side);
    for (Tensor* b : {&p.encoder.b1, &p.encoder.b2, &p.decoder.b}) *b = rng.normal(1, b->cols(), 0.1);
  }
  ModelState& s = inst.model.state();
  s.user_means = rng.normal(o.users, o.aspects * o.dim, 0.5);
  s.item_means = rng.normal(o.items, o.aspects * o.dim, 0.5);
  s.user_probs = random_simplex(o.users, o.aspects, rng);
  s.item_probs = random_simplex(o.items, o.aspects, rng);
  for (std::size_t a = 0; a < o.aspects; ++a) {
    inst.user_noise.push_back(rng.standard_normal(o.users, o.dim));
    inst.item_noise.push_back(rng.standard_normal(o.items, o.dim));
  }
  return inst;
}

struct Evaluation {
  double loss = 0.0;
  std::vector<Tensor> grads;  // in named_params order of the phase side
};

Evaluation evaluate(const Instance& inst, Side side, bool with_grad) {
  Batch batch{side, {}};
  for (std::size_t e = 0; e < inst.model.count(side); ++e) batch.entities.push_back(static_cast<Index>(e));
  const Tensor slab = batch.slab(inst.train);
  Tape tape;
  ModelVars vars = register_params(tape, inst.model.params());
  PhaseInputs in;
  in.side = side;
  in.slab = &slab;
  in.other_means = &inst.model.state().means(other(side));
  in.other_probs = &inst.model.state().probs(other(side));
  in.noise = side == Side::kUser ? inst.user_noise : inst.item_noise;
  in.beta = inst.config.beta;
  PhaseGraph g = build_phase_objective(tape, inst.config, vars, inst.model.params(), in);
  Evaluation ev;
  ev.loss = tape.value(g.loss).item();
  if (with_grad) {
    tape.backward(g.loss);
    const SideVars& sv = vars.side(side);
    for (Var v : {sv.encoder.w1, sv.encoder.b1, sv.encoder.w2, sv.encoder.b2, sv.decoder.w,
                  sv.decoder.b, sv.prototypes}) {
      ev.grads.push_back(tape.grad(v));
    }
  }
  return ev;
}

const char* group_of(Side side, std::size_t param_index) {
  const bool user = side == Side::kUser;
  if (param_index < 4) return user ? "encoder_u" : "encoder_i";
  if (param_index < 6) return user ? "decoder_u" : "decoder_i";
  return user ? "prototypes_M" : "prototypes_H";
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  Instance inst = make_instance(options);
  GradcheckReport report;
  const char* order[] = {"encoder_u", "encoder_i", "decoder_u", "decoder_i", "prototypes_M",
                         "prototypes_H"};
  for (const char* name : order) report.groups.push_back({name, 0, 0.0, 0.0, false});
  auto group = [&](const std::string& name) -> GroupResult& {
    return *std::find_if(report.groups.begin(), report.groups.end(),
                         [&](const GroupResult& g) { return g.group == name; });
  };

  for (Side side : {Side::kUser, Side::kItem}) {
    Evaluation base = evaluate(inst, side, true);
    auto params = named_params(inst.model.params().side(side), side);
    for (std::size_t k = 0; k < params.size(); ++k) {
      GroupResult& res = group(group_of(side, k));
      const bool flip = options.flip_group == res.group;
      Tensor& p = *params[k].second;
      for (std::size_t c = 0; c < p.size(); ++c) {
        const double saved = p[c];
        p[c] = saved + options.step;
        const double plus = evaluate(inst, side, false).loss;
        p[c] = saved - options.step;
        const double minus = evaluate(inst, side, false).loss;
        p[c] = saved;
        const double numeric = (plus - minus) / (2.0 * options.step);
        const double analytic = flip ? -base.grads[k][c] : base.grads[k][c];
        const double abs_err = std::abs(analytic - numeric);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
        res.max_abs_err = std::max(res.max_abs_err, abs_err);
        res.max_rel_err = std::max(res.max_rel_err, abs_err / denom);
        ++res.coordinates;
      }
    }
  }
  report.pass = true;
  for (auto& g : report.groups) {
    g.pass = g.coordinates > 0 && g.max_rel_err < options.tolerance;
    report.pass = report.pass && g.pass;
  }
  return report;
}

}  // namespace dualvae
