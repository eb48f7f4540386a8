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
#include <vector>

#include <gtest/gtest.h>

#include "dualvae/errors.hpp"
#include "support.hpp"

namespace dualvae {
namespace {

using testing::random_simplex;
using testing::random_tensor;

EncoderParams random_encoder(std::size_t in, std::size_t hidden, std::size_t d,
                             std::uint64_t seed, double bias = 0.0) {
  return {random_tensor(in, hidden, seed, 0.5), random_tensor(1, hidden, seed + 1, bias),
          random_tensor(hidden, 2 * d, seed + 2, 0.5), random_tensor(1, 2 * d, seed + 3, bias)};
}

TEST(Masking, UniformAndOneHotColumns) {
  std::vector<double> r{1, 0, 1, 1, 0};
  auto quarter = mask_interactions(r, std::vector<double>(5, 0.25));
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(quarter[k], r[k] / 4);
  auto ones = mask_interactions(r, std::vector<double>(5, 1.0));
  EXPECT_EQ(ones, r);
  auto zeros = mask_interactions(r, std::vector<double>(5, 0.0));
  for (double v : zeros) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(mask_interactions(r, std::vector<double>(4, 1.0)), DimensionError);
}

TEST(Masking, DecompositionIdentityOnRandomSimplex) {
  Rng rng(3);
  const std::size_t n = 40, a = 5;
  Tensor probs = random_simplex(n, a, rng);
  Tensor slab(6, n);
  for (double& v : slab.data()) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
  Tensor total(6, n);
  for (std::size_t k = 0; k < a; ++k) total += mask_slab(slab, probs, k);
  EXPECT_LT(max_abs_diff(total, slab), 1e-12);
}

TEST(Encoder, ZeroInputZeroBiasGivesPrior) {
  EncoderParams enc = random_encoder(6, 5, 3, 1);
  enc.b1 = Tensor(1, 5);
  enc.b2 = Tensor(1, 6);
  Gaussian g = encode(Tensor(1, 6), enc, 3, 10.0);
  for (double v : g.mean.data()) EXPECT_EQ(v, 0.0);
  for (double v : g.stddev.data()) EXPECT_EQ(v, 1.0);
}

TEST(Encoder, TapeAndPlainFormsAgree) {
  EncoderParams enc = random_encoder(7, 6, 4, 2, 0.2);
  Tensor x = random_tensor(3, 7, 9);
  Gaussian g = encode(x, enc, 4, 10.0);
  Gaussian again = encode(x, enc, 4, 10.0);
  EXPECT_EQ(g.mean, again.mean);
  Tape t;
  EncoderVars v{t.constant(enc.w1), t.constant(enc.b1), t.constant(enc.w2), t.constant(enc.b2)};
  Posterior p = encode(t, t.constant(x), v, 4, 10.0);
  EXPECT_LT(max_abs_diff(t.value(p.mean), g.mean), 1e-15);
  for (std::size_t k = 0; k < g.stddev.size(); ++k)
    EXPECT_NEAR(std::exp(0.5 * t.value(p.logvar)[k]), g.stddev[k], 1e-15);
}

TEST(Encoder, LogvarIsClamped) {
  EncoderParams enc = random_encoder(2, 2, 1, 4);
  enc.w2 = Tensor(2, 2);
  enc.b2 = Tensor{{0.0, 50.0}};
  Gaussian g = encode(Tensor(1, 2), enc, 1, 10.0);
  EXPECT_NEAR(g.stddev[0], std::exp(5.0), 1e-9);
}

TEST(Encoder, MeanJacobianMatchesFiniteDifferences) {
  EncoderParams enc = random_encoder(5, 4, 3, 6, 0.3);
  auto cmp = testing::compare_gradients(
      [&](Tape& t, const std::vector<Var>& x) {
        EncoderVars v{x[1], x[2], x[3], x[4]};
        Posterior p = encode(t, x[0], v, 3, 10.0);
        return t.concat_cols(std::vector<Var>{p.mean, p.logvar});
      },
      {random_tensor(2, 5, 7), enc.w1, enc.b1, enc.w2, enc.b2});
  EXPECT_LT(cmp.max_rel_err, 1e-4);
}

TEST(Reparameterize, EvalModeAndZeroStddev) {
  Tensor mu = random_tensor(2, 3, 1);
  EXPECT_EQ(reparameterize(mu, Tensor(2, 3, 0.0), random_tensor(2, 3, 2)), mu);
  Tape t;
  Posterior p{t.constant(mu), t.constant(Tensor(2, 3, 0.4))};
  EXPECT_EQ(t.value(reparameterize(t, p, Tensor())), mu);
  Tensor eps = random_tensor(2, 3, 3);
  Var z = reparameterize(t, p, eps);
  for (std::size_t k = 0; k < 6; ++k)
    EXPECT_NEAR(t.value(z)[k], mu[k] + std::exp(0.2) * eps[k], 1e-15);
}

TEST(Reparameterize, MonteCarloMean) {
  Rng rng(4);
  const double mu = 0.7, sigma = 1.3;
  const std::size_t n = 100000;
  Tensor eps = rng.standard_normal(n, 1);
  Tensor z = reparameterize(Tensor(n, 1, mu), Tensor(n, 1, sigma), eps);
  double mean = 0;
  for (double v : z.data()) mean += v / n;
  EXPECT_NEAR(mean, mu, 3 * sigma / std::sqrt(double(n)));
}

TEST(Reparameterize, GradientsReachMeanAndLogvar) {
  Tensor eps = random_tensor(2, 3, 5);
  auto cmp = testing::compare_gradients(
      [&](Tape& t, const std::vector<Var>& x) {
        return reparameterize(t, Posterior{x[0], x[1]}, eps);
      },
      {random_tensor(2, 3, 6), random_tensor(2, 3, 7)});
  EXPECT_LT(cmp.max_rel_err, 1e-6);
}

TEST(Kl, ClosedFormValues) {
  EXPECT_EQ(kl_gaussian(std::vector<double>{0, 0}, std::vector<double>{1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(kl_gaussian(std::vector<double>{1, 0}, std::vector<double>{1, 1}), 0.5);
  EXPECT_THROW(kl_gaussian(std::vector<double>{0}, std::vector<double>{0}), DomainError);
  Tape t;
  Tensor mu = random_tensor(3, 2, 8), lv = random_tensor(3, 2, 9);
  Var kl = kl_gaussian(t, Posterior{t.constant(mu), t.constant(lv)});
  std::vector<double> sd(lv.size());
  for (std::size_t k = 0; k < sd.size(); ++k) sd[k] = std::exp(0.5 * lv[k]);
  EXPECT_NEAR(t.value(kl).item(), kl_gaussian(mu.data(), sd), 1e-12);
}

TEST(Kl, MatchesMonteCarlo) {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const double mu = rng.normal(), sigma = 0.3 + 1.5 * rng.uniform();
    double est = 0;
    const std::size_t n = 100000;
    for (std::size_t s = 0; s < n; ++s) {
      const double e = rng.normal(), z = mu + sigma * e;
      est += (-std::log(sigma) - 0.5 * e * e + 0.5 * z * z) / n;
    }
    const double closed = kl_gaussian(std::vector<double>{mu}, std::vector<double>{sigma});
    EXPECT_NEAR(est, closed, 0.01 * closed + 3e-3) << mu << " " << sigma;
  }
}

}  // namespace
}  // namespace dualvae
