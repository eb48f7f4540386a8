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
#include <string>

#include "dualvae/errors.hpp"

namespace dualvae {

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamOptions& opts,
               std::string_view name) {
  if (!param.same_shape(grad)) {
    throw DimensionError("gradient shape differs from parameter " + std::string(name));
  }
  if (!grad.all_finite()) throw NumericError("non-finite gradient for " + std::string(name));
  if (state.step == 0 || !state.m.same_shape(param)) {
    state.m = Tensor(param.rows(), param.cols());
    state.v = Tensor(param.rows(), param.cols());
    state.step = 0;
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);
  for (std::size_t k = 0; k < param.size(); ++k) {
    const double g = grad[k];
    state.m[k] = opts.beta1 * state.m[k] + (1.0 - opts.beta1) * g;
    state.v[k] = opts.beta2 * state.v[k] + (1.0 - opts.beta2) * g * g;
    const double m_hat = state.m[k] / c1;
    const double v_hat = state.v[k] / c2;
    param[k] -= opts.lr * m_hat / (std::sqrt(v_hat) + opts.eps);
  }
}

}  // namespace dualvae
