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

#include "dualvae/add.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dualvae/errors.hpp"
#include "support.hpp"

namespace dualvae {
namespace {

using testing::random_tensor;

// softmax_a(cos(mu^a, h_a) / temp) with explicit loops.
std::vector<double> loop_probs(const Tensor& means, std::size_t row, const Tensor& protos,
                               double temp) {
  const std::size_t a_count = protos.rows(), d = protos.cols();
  std::vector<double> logits(a_count);
  for (std::size_t a = 0; a < a_count; ++a) {
    double dot = 0, nz = 0, nh = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const double z = means(row, a * d + k), h = protos(a, k);
      dot += z * h;
      nz += z * z;
      nh += h * h;
    }
    logits[a] = (nz == 0 || nh == 0 ? 0.0 : dot / std::sqrt(nz * nh)) / temp;
  }
  double total = 0;
  for (double& l : logits) total += (l = std::exp(l));
  for (double& l : logits) l /= total;
  return logits;
}

TEST(AspectProbs, MatchesLoopOracle) {
  const std::size_t a = 4, d = 5;
  Tensor means = random_tensor(30, a * d, 1);
  Tensor protos = random_tensor(a, d, 2);
  for (double temp : {0.1, 1.0}) {
    Tensor p = aspect_probs(means, protos, temp);
    for (std::size_t r = 0; r < 30; ++r) {
      auto want = loop_probs(means, r, protos, temp);
      for (std::size_t k = 0; k < a; ++k) EXPECT_NEAR(p(r, k), want[k], 1e-12);
    }
  }
}

TEST(AspectProbs, HandComputedTwoAspectCase) {
  // Cosines (1, 0) at temperature 1.
  Tensor means{{1.0, 0.0, 0.0, 1.0}};
  Tensor protos{{2.0, 0.0}, {1.0, 0.0}};
  Tensor p = item_aspect_probs(means, protos, 1.0);
  EXPECT_NEAR(p(0, 0), 0.7311, 1e-4);
  EXPECT_NEAR(p(0, 1), 0.2689, 1e-4);
}

TEST(AspectProbs, DegenerateRowsAreUniform) {
  Tensor protos = random_tensor(3, 2, 4);
  // Zero means give cosine 0 against every prototype.
  Tensor p = user_aspect_probs(Tensor(2, 6), protos, 0.1);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p(0, k), 1.0 / 3, 1e-15);
  // Each aspect block orthogonal to its prototype.
  Tensor orth{{0.0, 1.0, 0.0, 2.0}};
  Tensor axis{{1.0, 0.0}, {3.0, 0.0}};
  Tensor q = aspect_probs(orth, axis, 0.1);
  EXPECT_NEAR(q(0, 0), 0.5, 1e-15);
  Tensor single = aspect_probs(random_tensor(5, 3, 5), random_tensor(1, 3, 6), 0.1);
  for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(single(r, 0), 1.0);
  Tensor u = uniform_aspect_probs(3, 4);
  for (double v : u.data()) EXPECT_EQ(v, 0.25);
}

TEST(AspectProbs, SimplexOnManyRandomRows) {
  Tensor p = aspect_probs(random_tensor(1000, 4 * 3, 7, 3.0), random_tensor(4, 3, 8), 0.1);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double total = 0;
    for (double v : p.row_span(r)) {
      EXPECT_GT(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(AspectProbs, PermutationEquivariance) {
  const std::size_t a = 3, d = 4;
  Tensor means = random_tensor(6, a * d, 9);
  Tensor protos = random_tensor(a, d, 10);
  const std::vector<std::size_t> perm{2, 0, 1};
  Tensor pm(6, a * d), pp(a, d);
  for (std::size_t k = 0; k < a; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      pp(k, j) = protos(perm[k], j);
      for (std::size_t r = 0; r < 6; ++r) pm(r, k * d + j) = means(r, perm[k] * d + j);
    }
  }
  Tensor base = aspect_probs(means, protos, 0.1), moved = aspect_probs(pm, pp, 0.1);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t k = 0; k < a; ++k) EXPECT_NEAR(moved(r, k), base(r, perm[k]), 1e-15);
}

TEST(AspectProbs, RejectsBadArguments) {
  EXPECT_THROW(aspect_probs(Tensor(1, 4), Tensor(2, 2), 0.0), DomainError);
  EXPECT_THROW(aspect_probs(Tensor(1, 5), Tensor(2, 2), 0.1), DimensionError);
}

TEST(AspectProbs, GraphFormMatchesAndDifferentiates) {
  const std::size_t a = 3, d = 4;
  Tensor means = random_tensor(5, a * d, 11);
  Tensor protos = random_tensor(a, d, 12);
  Tape tape;
  std::vector<Var> blocks;
  Var all = tape.constant(means);
  for (std::size_t k = 0; k < a; ++k) blocks.push_back(tape.slice_cols(all, k * d, d));
  Var p = aspect_probs(tape, blocks, tape.constant(protos), 0.1);
  EXPECT_LT(max_abs_diff(tape.value(p), aspect_probs(means, protos, 0.1)), 1e-15);

  auto cmp = testing::compare_gradients(
      [&](Tape& t, const std::vector<Var>& x) {
        std::vector<Var> bl;
        for (std::size_t k = 0; k < a; ++k) bl.push_back(t.slice_cols(x[0], k * d, d));
        return aspect_probs(t, bl, x[1], 0.5);
      },
      {means, protos});
  EXPECT_LT(cmp.max_rel_err, 1e-4);
}

TEST(EntropyReport, WorkedValues) {
  Tensor rows{{0.25, 0.25, 0.25, 0.25}, {0.0, 1.0, 0.0, 0.0}, {0.7, 0.3, 0.0, 0.0}};
  AspectReport r = aspect_entropy_report(rows);
  EXPECT_NEAR(r.entropy[0], std::log(4.0), 1e-12);
  EXPECT_NEAR(r.entropy[1], 0.0, 1e-15);
  EXPECT_NEAR(r.entropy[2], 0.6109, 1e-4);
  EXPECT_EQ(r.argmax, (std::vector<std::size_t>{0, 1, 0}));
}

}  // namespace
}  // namespace dualvae
