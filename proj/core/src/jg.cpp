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

#include "dualvae/jg.hpp"

#include <cmath>

#include "dualvae/errors.hpp"

namespace dualvae {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> decode_one(std::span<const double> z, const DecoderParams& dec) {
  const std::size_t d = z.size();
  if (dec.w.rows() != d || dec.w.cols() != d) throw DimensionError("decoder must be d x d");
  std::vector<double> f(d);
  for (std::size_t c = 0; c < d; ++c) {
    double acc = dec.b[c];
    for (std::size_t k = 0; k < d; ++k) acc += z[k] * dec.w(k, c);
    f[c] = std::tanh(acc);
  }
  return f;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

Var decode(Tape& tape, Var z, const DecoderVars& dec) {
  return tape.tanh(tape.add(tape.matmul(z, dec.w), dec.b));
}

Tensor decode(const Tensor& z, const DecoderParams& dec) {
  Tensor f = matmul(z, dec.w);
  for (std::size_t r = 0; r < f.rows(); ++r) {
    auto row = f.row_span(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = std::tanh(row[c] + dec.b[c]);
  }
  return f;
}

double skip_score(std::span<const double> z_user, std::span<const double> z_item,
                  const DecoderParams& user_dec, const DecoderParams& item_dec) {
  if (z_user.size() != z_item.size()) throw DimensionError("latent sizes differ");
  auto fu = decode_one(z_user, user_dec);
  auto fi = decode_one(z_item, item_dec);
  return dot(z_user, z_item) + dot(fu, fi);
}

Var skip_scores(Tape& tape, Var z_own, Var f_own, Var z_other, Var f_other) {
  return tape.add(tape.matmul(z_own, z_other, false, true),
                  tape.matmul(f_own, f_other, false, true));
}

Var joint_scores(Tape& tape, std::span<const Var> skips, Var own_probs, Var other_probs_t) {
  if (skips.empty()) throw DimensionError("no aspects");
  Var total{};
  for (std::size_t a = 0; a < skips.size(); ++a) {
    Var weight = tape.matmul(tape.slice_cols(own_probs, a, 1), tape.slice_rows(other_probs_t, a, 1));
    Var term = tape.mul(weight, tape.sigmoid(skips[a]));
    total = a == 0 ? term : tape.add(total, term);
  }
  return total;
}

ScoreBreakdown joint_score(std::span<const double> z_user, std::span<const double> z_item,
                           std::span<const double> user_probs,
                           std::span<const double> item_probs, const DecoderParams& user_dec,
                           const DecoderParams& item_dec) {
  const std::size_t aspects = user_probs.size();
  if (aspects == 0 || item_probs.size() != aspects || z_user.size() != z_item.size() ||
      z_user.size() % aspects != 0) {
    throw DimensionError("joint score operands disagree on aspect layout");
  }
  const std::size_t d = z_user.size() / aspects;
  ScoreBreakdown out;
  out.addends.resize(aspects);
  for (std::size_t a = 0; a < aspects; ++a) {
    double s = skip_score(z_user.subspan(a * d, d), z_item.subspan(a * d, d), user_dec, item_dec);
    out.addends[a] = user_probs[a] * item_probs[a] * sigmoid(s);
    out.score += out.addends[a];
  }
  return out;
}

double poisson_loglik(double r, double g) {
  if (!(g > 0.0)) throw DomainError("Poisson rate must be positive");
  return r * std::log(g) - g;
}

Var poisson_loglik(Tape& tape, const Tensor& r, Var g) {
  Var observed = tape.mul(tape.log(g, r), tape.constant(r));
  return tape.sub(tape.sum(observed), tape.sum(g));
}

}  // namespace dualvae
