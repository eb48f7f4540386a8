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
#include <string_view>

#include "dualvae/tensor.hpp"

namespace dualvae {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment accumulators of one parameter tensor.
struct AdamState {
  Tensor m;
  Tensor v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update of `param` in place. Moments are created
/// on the first call. A non-finite gradient entry throws NumericError naming
/// `name`; the parameter is left untouched in that case.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamOptions& opts,
               std::string_view name);

}  // namespace dualvae
