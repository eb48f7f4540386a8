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

#include <spdlog/spdlog.h>

#include "dualvae/errors.hpp"

namespace dualvae {

Tensor uniform_aspect_probs(std::size_t rows, std::size_t aspects) {
  if (aspects == 0) throw DimensionError("aspect count must be positive");
  return Tensor(rows, aspects, 1.0 / static_cast<double>(aspects));
}

Var aspect_probs(Tape& tape, std::span<const Var> aspect_means, Var prototypes, double temp) {
  if (!(temp > 0.0)) throw DomainError("aspect temperature must be positive");
  const std::size_t aspects = aspect_means.size();
  if (aspects == 0) throw DimensionError("aspect count must be positive");
  if (tape.value(prototypes).rows() != aspects) {
    throw DimensionError("prototype rows must equal the aspect count");
  }
  std::vector<Var> cosines;
  cosines.reserve(aspects);
  for (std::size_t a = 0; a < aspects; ++a) {
    cosines.push_back(tape.cosine_rows(aspect_means[a], tape.slice_rows(prototypes, a, 1)));
  }
  Var logits = tape.scale(tape.concat_cols(cosines), 1.0 / temp);
  return tape.softmax_rows(logits);
}

Tensor aspect_probs(const Tensor& means, const Tensor& prototypes, double temp) {
  const std::size_t aspects = prototypes.rows();
  const std::size_t dim = prototypes.cols();
  if (aspects == 0 || means.cols() != aspects * dim) {
    throw DimensionError("means must have aspects * dim columns");
  }
  Tape tape;
  Var all = tape.constant(means);
  std::vector<Var> blocks;
  for (std::size_t a = 0; a < aspects; ++a) blocks.push_back(tape.slice_cols(all, a * dim, dim));
  Var probs = aspect_probs(tape, blocks, tape.constant(prototypes), temp);
  if (tape.zero_norm_events() > 0) {
    spdlog::warn("aspect attention met {} zero-norm vectors; their cosine was taken as 0",
                 tape.zero_norm_events());
  }
  return tape.value(probs);
}

AspectReport aspect_entropy_report(const Tensor& probs) {
  AspectReport report;
  report.entropy.reserve(probs.rows());
  report.argmax.reserve(probs.rows());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    auto row = probs.row_span(r);
    double h = 0.0;
    std::size_t best = 0;
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (row[a] > 0.0) h -= row[a] * std::log(row[a]);
      if (row[a] > row[best]) best = a;
    }
    report.entropy.push_back(h);
    report.argmax.push_back(best);
  }
  return report;
}

}  // namespace dualvae
