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
#include <vector>

#include <gtest/gtest.h>

#include "dualvae/errors.hpp"
#include "support.hpp"

namespace dualvae {
namespace {

using testing::random_simplex;
using testing::random_tensor;

double cosine(std::span<const double> x, std::span<const double> y) {
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dot += x[k] * y[k];
    nx += x[k] * x[k];
    ny += y[k] * y[k];
  }
  return nx == 0 || ny == 0 ? 0.0 : dot / std::sqrt(nx * ny);
}

// Direct transcription of the per-anchor loss with explicit sums.
double loop_infonce(const std::vector<Tensor>& z, const std::vector<Tensor>& o,
                    const std::vector<bool>& eligible, std::size_t b, std::size_t a,
                    const ContrastConfig& cfg) {
  if (!eligible[b]) return 0.0;
  auto zr = z[a].row_span(b);
  const double pos = cfg.use_neighbor_pos ? cosine(zr, o[a].row_span(b)) : cosine(zr, zr);
  double denom = std::exp(pos / cfg.tau);
  if (cfg.use_aspect_negs)
    for (std::size_t a2 = 0; a2 < z.size(); ++a2)
      if (a2 != a) denom += std::exp(cosine(zr, o[a2].row_span(b)) / cfg.tau);
  if (cfg.use_user_negs)
    for (std::size_t b2 = 0; b2 < eligible.size(); ++b2)
      if (b2 != b && eligible[b2]) denom += std::exp(cosine(zr, o[a].row_span(b2)) / cfg.tau);
  return -std::log(std::exp(pos / cfg.tau) / denom);
}

std::vector<Tensor> blocks(std::size_t a, std::size_t b, std::size_t d, std::uint64_t seed) {
  std::vector<Tensor> out;
  for (std::size_t k = 0; k < a; ++k) out.push_back(random_tensor(b, d, seed + k));
  return out;
}

TEST(Neighborhood, SingletonAndCancellation) {
  const std::size_t d = 3;
  Tensor means = random_tensor(2, 2 * d, 1);
  Tensor probs{{0.0, 1.0}, {0.5, 0.5}};
  std::vector<Index> one{0};
  auto o = neighborhood_repr(one, 1, means, probs, d);
  for (std::size_t k = 0; k < d; ++k) EXPECT_EQ(o[k], means(0, d + k));

  Tensor opposite(2, d);
  for (std::size_t k = 0; k < d; ++k) opposite(0, k) = -(opposite(1, k) = 0.7 + k);
  Tensor half{{0.5}, {0.5}};
  std::vector<Index> both{0, 1};
  for (double v : neighborhood_repr(both, 0, opposite, half, d)) EXPECT_EQ(v, 0.0);
  for (double v : neighborhood_repr({}, 0, opposite, half, d)) EXPECT_EQ(v, 0.0);
}

TEST(Neighborhood, BatchedMatchesLoopOracle) {
  const std::size_t a = 3, d = 4, n = 15;
  Rng rng(2);
  Tensor means = random_tensor(n, a * d, 3), probs = random_simplex(n, a, rng);
  Tensor slab(5, n);
  for (double& v : slab.data()) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
  auto reprs = neighborhood_reprs(slab, probs, means, a, d);
  for (std::size_t r = 0; r < 5; ++r) {
    std::vector<Index> nbrs;
    for (std::size_t j = 0; j < n; ++j)
      if (slab(r, j) != 0) nbrs.push_back(j);
    for (std::size_t k = 0; k < a; ++k) {
      auto single = neighborhood_repr(nbrs, k, means, probs, d);
      for (std::size_t c = 0; c < d; ++c) {
        double want = 0;
        for (Index j : nbrs) want += probs(j, k) * means(j, k * d + c);
        EXPECT_NEAR(reprs[k](r, c), want, 1e-12);
        EXPECT_NEAR(single[c], want, 1e-12);
      }
    }
  }
}

TEST(InfoNce, NoNegativesGivesZero) {
  auto z = blocks(1, 1, 3, 4), o = blocks(1, 1, 3, 8);
  EXPECT_NEAR(infonce_user(z, o, {true}, 0, 0, {}), 0.0, 1e-15);
}

TEST(InfoNce, SymmetricCaseClosedForm) {
  // Identical direction everywhere makes every similarity 1.
  for (std::size_t a : {1u, 2u, 4u}) {
    for (std::size_t b : {1u, 3u, 5u}) {
      std::vector<Tensor> z(a, Tensor(b, 3, 1.0)), o(a, Tensor(b, 3, 2.0));
      const double want = std::log(double(a + b - 1));
      EXPECT_NEAR(infonce_user(z, o, std::vector<bool>(b, true), b - 1, a - 1, {}), want, 1e-10);
      EXPECT_NEAR(infonce_item(z, o, std::vector<bool>(b, true), 0, 0, {}), want, 1e-10);
    }
  }
}

TEST(InfoNce, MatchesLoopOracleUnderAllFlagCombinations) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t a = 1 + rng.below(3), b = 1 + rng.below(4), d = 2 + rng.below(3);
    auto z = blocks(a, b, d, 100 + trial), o = blocks(a, b, d, 200 + trial);
    std::vector<bool> eligible(b);
    for (std::size_t k = 0; k < b; ++k) eligible[k] = rng.uniform() < 0.8;
    for (int flags = 0; flags < 8; ++flags) {
      ContrastConfig cfg;
      cfg.use_user_negs = flags & 1;
      cfg.use_aspect_negs = flags & 2;
      cfg.use_neighbor_pos = flags & 4;
      Tape t;
      std::vector<Var> zv;
      for (const auto& x : z) zv.push_back(t.constant(x));
      const Tensor& terms = t.value(contrastive_terms(t, zv, o, eligible, cfg));
      for (std::size_t ak = 0; ak < a; ++ak)
        for (std::size_t bk = 0; bk < b; ++bk)
          EXPECT_NEAR(terms(ak * b + bk, 0), loop_infonce(z, o, eligible, bk, ak, cfg), 1e-10)
              << "trial " << trial << " flags " << flags;
    }
  }
}

TEST(InfoNce, AspectNegativesFlagShrinksDenominator) {
  auto z = blocks(3, 4, 3, 40), o = blocks(3, 4, 3, 50);
  std::vector<bool> all(4, true);
  ContrastConfig no_aspect;
  no_aspect.use_aspect_negs = false;
  const double full = infonce_item(z, o, all, 1, 2, {});
  const double reduced = infonce_item(z, o, all, 1, 2, no_aspect);
  EXPECT_LT(reduced, full);
  EXPECT_NEAR(reduced, loop_infonce(z, o, all, 1, 2, no_aspect), 1e-12);
}

TEST(InfoNce, ImprovesWhenPositiveAlignsWithAnchor) {
  auto z = blocks(2, 3, 4, 60), o = blocks(2, 3, 4, 70);
  std::vector<bool> all(3, true);
  const double before = infonce_item(z, o, all, 0, 1, {});
  for (std::size_t k = 0; k < 4; ++k) o[1](0, k) = 2.5 * z[1](0, k);
  EXPECT_LT(infonce_item(z, o, all, 0, 1, {}), before);
}

TEST(InfoNce, IneligibleAnchorContributesNothing) {
  auto z = blocks(2, 3, 4, 80), o = blocks(2, 3, 4, 90);
  EXPECT_EQ(infonce_user(z, o, {true, false, true}, 1, 0, {}), 0.0);
}

TEST(InfoNce, GradientThroughAnchors) {
  auto o = blocks(2, 3, 4, 11);
  std::vector<bool> eligible{true, true, false};
  auto cmp = testing::compare_gradients(
      [&](Tape& t, const std::vector<Var>& x) {
        return contrastive_terms(t, x, o, eligible, {});
      },
      blocks(2, 3, 4, 12));
  EXPECT_LT(cmp.max_rel_err, 1e-5);
}

TEST(TotalLoss, Arithmetic) {
  EXPECT_DOUBLE_EQ(total_loss(5.0, 2.0, 0.1), 5.2);
  EXPECT_EQ(total_loss(5.0, 2.0, 0.0), 5.0);
  Tape t;
  Var v = total_loss(t, t.constant(Tensor::scalar(5.0)), t.constant(Tensor::scalar(2.0)), 0.1);
  EXPECT_DOUBLE_EQ(t.value(v).item(), 5.2);
}

}  // namespace
}  // namespace dualvae
