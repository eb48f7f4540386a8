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

#include <gtest/gtest.h>

namespace dualvae {
namespace {

TEST(Gradcheck, EveryGroupPassesOnSeveralSeeds) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    GradcheckOptions opts;
    opts.seed = seed;
    GradcheckReport r = run_gradcheck(opts);
    EXPECT_TRUE(r.pass) << "seed " << seed;
    ASSERT_EQ(r.groups.size(), 6u);
    for (const auto& g : r.groups) {
      EXPECT_GT(g.coordinates, 0u) << g.group;
      EXPECT_LT(g.max_rel_err, 1e-4) << g.group << " seed " << seed;
    }
  }
}

TEST(Gradcheck, FlippedGroupIsCaught) {
  GradcheckOptions opts;
  opts.flip_group = "decoder_i";
  GradcheckReport r = run_gradcheck(opts);
  EXPECT_FALSE(r.pass);
  for (const auto& g : r.groups) EXPECT_EQ(g.pass, g.group != "decoder_i") << g.group;
}

}  // namespace
}  // namespace dualvae
