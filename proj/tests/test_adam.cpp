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

#include "dualvae/adam.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dualvae/errors.hpp"

namespace dualvae {
namespace {

TEST(Adam, MatchesScalarReference) {
  AdamOptions opts;
  opts.lr = 0.05;
  Tensor p{{1.0, -2.0}};
  AdamState st;
  double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {1.0, -2.0};
  for (int step = 1; step <= 25; ++step) {
    Tensor g{{2 * p[0], std::sin(p[1])}};
    const double gr[2] = {2 * ref[0], std::sin(ref[1])};
    adam_step(p, g, st, opts, "p");
    for (int k = 0; k < 2; ++k) {
      m[k] = opts.beta1 * m[k] + (1 - opts.beta1) * gr[k];
      v[k] = opts.beta2 * v[k] + (1 - opts.beta2) * gr[k] * gr[k];
      const double mh = m[k] / (1 - std::pow(opts.beta1, step));
      const double vh = v[k] / (1 - std::pow(opts.beta2, step));
      ref[k] -= opts.lr * mh / (std::sqrt(vh) + opts.eps);
    }
    EXPECT_NEAR(p[0], ref[0], 1e-14);
    EXPECT_NEAR(p[1], ref[1], 1e-14);
  }
  EXPECT_EQ(st.step, 25u);
  EXPECT_TRUE(st.m.same_shape(p));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamOptions opts;
  opts.lr = 0.01;
  Tensor p{{0.5, 0.5, 0.5}};
  AdamState st;
  adam_step(p, Tensor{{3.0, -0.2, 0.0}}, st, opts, "p");
  EXPECT_NEAR(p[0], 0.49, 1e-9);
  EXPECT_NEAR(p[1], 0.51, 1e-9);
  EXPECT_EQ(p[2], 0.5);
}

TEST(Adam, NonFiniteGradientLeavesParameterAlone) {
  Tensor p{{1.0, 2.0}};
  const Tensor before = p;
  AdamState st;
  try {
    adam_step(p, Tensor{{0.1, std::numeric_limits<double>::quiet_NaN()}}, st, {}, "enc.w1");
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("enc.w1"), std::string::npos);
  }
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.step, 0u);
}

}  // namespace
}  // namespace dualvae
