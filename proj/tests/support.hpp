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

#include <cmath>
#include <functional>
#include <vector>

#include "dualvae/rng.hpp"
#include "dualvae/tape.hpp"
#include "dualvae/tensor.hpp"

namespace dualvae::testing {

// Builds a graph from leaf variables and returns the output node.
using GraphFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCompare {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
};

/// Compares the tape gradient of <w, f(inputs)> with central differences,
/// where w is a fixed random weighting of the output entries.
inline GradCompare compare_gradients(const GraphFn& f, std::vector<Tensor> inputs,
                                     std::uint64_t seed = 1, double h = 1e-6) {
  Rng rng(seed);
  Tensor weights;
  auto objective = [&](const std::vector<Tensor>& xs, std::vector<Tensor>* grads) {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& x : xs) leaves.push_back(tape.parameter(x));
    Var out = f(tape, leaves);
    if (weights.empty()) {
      const Tensor& v = tape.value(out);
      weights = rng.standard_normal(v.rows(), v.cols());
    }
    Var w = tape.constant(weights);
    Var loss = tape.sum(tape.mul(out, w));
    if (grads != nullptr) {
      tape.backward(loss);
      for (Var l : leaves) grads->push_back(tape.grad(l));
    }
    return tape.value(loss).item();
  };
  std::vector<Tensor> analytic;
  objective(inputs, &analytic);
  GradCompare cmp;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t c = 0; c < inputs[k].size(); ++c) {
      const double saved = inputs[k][c];
      inputs[k][c] = saved + h;
      const double plus = objective(inputs, nullptr);
      inputs[k][c] = saved - h;
      const double minus = objective(inputs, nullptr);
      inputs[k][c] = saved;
      const double numeric = (plus - minus) / (2 * h);
      const double err = std::abs(numeric - analytic[k][c]);
      const double denom = std::max({std::abs(numeric), std::abs(analytic[k][c]), 1e-6});
      cmp.max_abs_err = std::max(cmp.max_abs_err, err);
      cmp.max_rel_err = std::max(cmp.max_rel_err, err / denom);
    }
  }
  return cmp;
}

inline Tensor random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double scale = 1.0) {
  Rng rng(seed);
  return rng.normal(rows, cols, scale);
}

// Rows drawn from a softmax of standard normals.
inline Tensor random_simplex(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t = rng.standard_normal(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (double& v : t.row_span(r)) total += (v = std::exp(v));
    for (double& v : t.row_span(r)) v /= total;
  }
  return t;
}

}  // namespace dualvae::testing
