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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dualvae {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  std::size_t users = 8;
  std::size_t items = 12;
  std::size_t aspects = 3;
  std::size_t dim = 4;
  std::size_t hidden = 8;
  double density = 0.35;
  double gamma = 0.1;
  double step = 1e-5;       // central-difference step
  double tolerance = 1e-4;  // on the relative error
  // Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  // Test hook: negate the analytic gradient of this group.
  std::string flip_group;
};

struct GroupResult {
  std::string group;
  std::size_t coordinates = 0;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  bool pass = false;
};

struct GradcheckReport {
  std::vector<GroupResult> groups;
  bool pass = false;
};

/// Compares analytic gradients of the full training objective (ELBO plus
/// contrastive term, sampled noise held fixed) with central differences for
/// every parameter group: encoder_u, encoder_i, decoder_u, decoder_i,
/// prototypes_M, prototypes_H. User-side groups are checked on the user
/// phase objective, item-side groups on the item phase objective.
GradcheckReport run_gradcheck(const GradcheckOptions& options = {});

}  // namespace dualvae
