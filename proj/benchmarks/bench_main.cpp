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

#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "dualvae/eval.hpp"
#include "dualvae/objective.hpp"
#include "dualvae/rng.hpp"
#include "dualvae/synth.hpp"
#include "dualvae/tensor.hpp"

namespace dualvae {
namespace {

// Dense product with a sparse binary left operand, the shape of the encoder's
// first layer on a batch of interaction rows.
void BM_SlabMatmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Tensor slab(128, n);
  for (double& v : slab.data()) v = rng.uniform() < 0.02 ? 1.0 : 0.0;
  Tensor w = rng.standard_normal(n, 64);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(slab, w));
  state.SetItemsProcessed(state.iterations() * 128 * static_cast<std::int64_t>(n) * 64);
}
BENCHMARK(BM_SlabMatmul)->Arg(1000)->Arg(4000);

void BM_DenseMatmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  Tensor a = rng.standard_normal(n, n), b = rng.standard_normal(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b, false, true));
}
BENCHMARK(BM_DenseMatmul)->Arg(64)->Arg(256);

struct World {
  InteractionMatrix train;
  Model model;
};

World make_world(std::size_t users, std::size_t items) {
  SynthData d = generate(users, items, 4, 0.02, 3);
  Rng rng(4);
  World w{d.matrix, Model::init(ModelConfig{}, users, items, rng)};
  w.model.refresh_means(Side::kUser, w.train);
  w.model.refresh_means(Side::kItem, w.train);
  return w;
}

// Forward and backward of one 128-user minibatch of the user phase.
void BM_PhaseObjective(benchmark::State& state) {
  World w = make_world(1000, static_cast<std::size_t>(state.range(0)));
  std::vector<Index> ids(128);
  std::iota(ids.begin(), ids.end(), 0);
  Batch batch{Side::kUser, ids};
  const Tensor slab = batch.slab(w.train);
  Rng rng(5);
  std::vector<Tensor> noise;
  for (int a = 0; a < 4; ++a) noise.push_back(rng.standard_normal(128, 25));
  for (auto _ : state) {
    Tape tape;
    ModelVars vars = register_params(tape, w.model.params());
    PhaseInputs in{Side::kUser, &slab, &w.model.state().item_means, &w.model.state().item_probs,
                   noise, 1.0};
    PhaseGraph g = build_phase_objective(tape, w.model.config(), vars, w.model.params(), in);
    tape.backward(g.loss);
    benchmark::DoNotOptimize(tape.grad(vars.user.encoder.w1));
  }
}
BENCHMARK(BM_PhaseObjective)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_ScoreAll(benchmark::State& state) {
  World w = make_world(512, static_cast<std::size_t>(state.range(0)));
  std::vector<Index> users(512);
  std::iota(users.begin(), users.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(score_all(w.model, users));
  state.SetItemsProcessed(state.iterations() * 512 * state.range(0));
}
BENCHMARK(BM_ScoreAll)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dualvae

BENCHMARK_MAIN();
