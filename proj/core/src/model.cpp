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

#include "dualvae/model.hpp"

#include <cmath>
#include <sstream>

#include "dualvae/errors.hpp"

namespace dualvae {

namespace {

constexpr std::size_t kBlock = 256;

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  return rng.normal(fan_in, fan_out, std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)));
}

SideParams init_side(const ModelConfig& c, std::size_t input, Rng& rng) {
  SideParams p;
  p.encoder.w1 = glorot(input, c.hidden, rng);
  p.encoder.b1 = Tensor(1, c.hidden);
  p.encoder.w2 = glorot(c.hidden, 2 * c.dim, rng);
  p.encoder.b2 = Tensor(1, 2 * c.dim);
  p.decoder.w = glorot(c.dim, c.dim, rng);
  p.decoder.b = Tensor(1, c.dim);
  p.prototypes = rng.normal(c.aspects, c.dim, 1.0 / std::sqrt(static_cast<double>(c.dim)));
  return p;
}

Tensor column_block(const Tensor& t, std::size_t row0, std::size_t rows, std::size_t col0,
                    std::size_t cols) {
  Tensor out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = t(row0 + r, col0 + c);
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void expect_shape(const Tensor& t, std::size_t rows, std::size_t cols, const std::string& what) {
  if (t.rows() != rows || t.cols() != cols) {
    std::ostringstream msg;
    msg << what << " has shape " << t.rows() << "x" << t.cols() << ", expected " << rows << "x"
        << cols;
    throw DimensionError(msg.str());
  }
}

}  // namespace

AblationFlags parse_ablation(const std::string& list) {
  AblationFlags f;
  std::stringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) {
    const auto b = name.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    name = name.substr(b, name.find_last_not_of(" \t") - b + 1);
    if (name == "no_add") f.no_add = true;
    else if (name == "no_ud") f.no_ud = true;
    else if (name == "no_id") f.no_id = true;
    else if (name == "no_nrc") f.no_nrc = true;
    else if (name == "no_uns") f.no_uns = true;
    else if (name == "no_ans") f.no_ans = true;
    else if (name == "no_nps") f.no_nps = true;
    else if (name != "none") throw ConfigError("unknown ablation flag '" + name + "'");
  }
  return f;
}

std::string format_ablation(const AblationFlags& f) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(f.no_add, "no_add");
  add(f.no_ud, "no_ud");
  add(f.no_id, "no_id");
  add(f.no_nrc, "no_nrc");
  add(f.no_uns, "no_uns");
  add(f.no_ans, "no_ans");
  add(f.no_nps, "no_nps");
  return out;
}

bool ModelConfig::disentangled(Side side) const {
  if (ablation.no_add) return false;
  return side == Side::kUser ? !ablation.no_ud : !ablation.no_id;
}

ContrastConfig ModelConfig::contrast() const {
  ContrastConfig c;
  c.tau = tau;
  c.gamma = effective_gamma();
  c.use_user_negs = !ablation.no_uns;
  c.use_aspect_negs = !ablation.no_ans;
  c.use_neighbor_pos = !ablation.no_nps;
  return c;
}

void ModelConfig::validate() const {
  if (aspects == 0) throw ConfigError("model.aspects must be at least 1");
  if (dim == 0) throw ConfigError("model.dim must be at least 1");
  if (hidden == 0) throw ConfigError("model.hidden must be at least 1");
  if (!(temp > 0.0)) throw ConfigError("model.temp must be positive");
  if (!(tau > 0.0)) throw ConfigError("contrast.tau must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("contrast.gamma must be non-negative");
  if (!(beta >= 0.0)) throw ConfigError("model.beta must be non-negative");
  if (!(logvar_clamp > 0.0)) throw ConfigError("model.logvar_clamp must be positive");
}

std::vector<std::pair<std::string, Tensor*>> named_params(SideParams& p, Side side) {
  const std::string s = side_name(side);
  return {{s + ".encoder.w1", &p.encoder.w1}, {s + ".encoder.b1", &p.encoder.b1},
          {s + ".encoder.w2", &p.encoder.w2}, {s + ".encoder.b2", &p.encoder.b2},
          {s + ".decoder.w", &p.decoder.w},   {s + ".decoder.b", &p.decoder.b},
          {s + ".prototypes", &p.prototypes}};
}

std::vector<std::pair<std::string, const Tensor*>> named_params(const SideParams& p, Side side) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : named_params(const_cast<SideParams&>(p), side)) out.emplace_back(name, t);
  return out;
}

Model Model::init(const ModelConfig& config, std::size_t num_users, std::size_t num_items,
                  Rng& rng) {
  config.validate();
  if (num_users == 0 || num_items == 0) throw DimensionError("model needs users and items");
  Model m;
  m.config_ = config;
  m.num_users_ = num_users;
  m.num_items_ = num_items;
  m.params_.user = init_side(config, num_items, rng);
  m.params_.item = init_side(config, num_users, rng);
  m.state_.user_probs = uniform_aspect_probs(num_users, config.aspects);
  m.state_.item_probs = uniform_aspect_probs(num_items, config.aspects);
  m.state_.user_means = Tensor(num_users, config.aspects * config.dim);
  m.state_.item_means = Tensor(num_items, config.aspects * config.dim);
  return m;
}

Model Model::assemble(const ModelConfig& config, std::size_t num_users, std::size_t num_items,
                      ModelParams params, ModelState state) {
  config.validate();
  const std::size_t a = config.aspects, d = config.dim, h = config.hidden;
  for (Side side : {Side::kUser, Side::kItem}) {
    const std::size_t input = side == Side::kUser ? num_items : num_users;
    const SideParams& p = params.side(side);
    const std::string s = side_name(side);
    expect_shape(p.encoder.w1, input, h, s + ".encoder.w1");
    expect_shape(p.encoder.b1, 1, h, s + ".encoder.b1");
    expect_shape(p.encoder.w2, h, 2 * d, s + ".encoder.w2");
    expect_shape(p.encoder.b2, 1, 2 * d, s + ".encoder.b2");
    expect_shape(p.decoder.w, d, d, s + ".decoder.w");
    expect_shape(p.decoder.b, 1, d, s + ".decoder.b");
    expect_shape(p.prototypes, a, d, s + ".prototypes");
  }
  expect_shape(state.user_probs, num_users, a, "user probabilities");
  expect_shape(state.item_probs, num_items, a, "item probabilities");
  expect_shape(state.user_means, num_users, a * d, "user means");
  expect_shape(state.item_means, num_items, a * d, "item means");
  Model m;
  m.config_ = config;
  m.num_users_ = num_users;
  m.num_items_ = num_items;
  m.params_ = std::move(params);
  m.state_ = std::move(state);
  return m;
}

void Model::refresh_means(Side side, const InteractionMatrix& train) {
  if (train.num_users() != num_users_ || train.num_items() != num_items_) {
    throw DimensionError("interaction matrix does not match the model");
  }
  const std::size_t a_count = config_.aspects, d = config_.dim;
  const SideParams& p = params_.side(side);
  const Tensor& other_probs = state_.probs(other(side));
  Tensor& means = state_.means(side);
  const std::size_t n = count(side);
  for (std::size_t start = 0; start < n; start += kBlock) {
    Batch batch{side, {}};
    for (std::size_t e = start; e < std::min(n, start + kBlock); ++e) {
      batch.entities.push_back(static_cast<Index>(e));
    }
    const Tensor slab = batch.slab(train);
    for (std::size_t a = 0; a < a_count; ++a) {
      Gaussian g = encode(mask_slab(slab, other_probs, a), p.encoder, d, config_.logvar_clamp);
      for (std::size_t r = 0; r < batch.entities.size(); ++r) {
        for (std::size_t k = 0; k < d; ++k) means(start + r, a * d + k) = g.mean(r, k);
      }
    }
  }
}

void Model::refresh_probs(Side side) {
  if (config_.disentangled(side)) {
    state_.probs(side) =
        aspect_probs(state_.means(side), params_.side(side).prototypes, config_.temp);
  } else {
    state_.probs(side) = uniform_aspect_probs(count(side), config_.aspects);
  }
}

Tensor Model::score_users(std::span<const Index> users) const {
  const std::size_t a_count = config_.aspects, d = config_.dim;
  Tensor scores(users.size(), num_items_);
  for (std::size_t a = 0; a < a_count; ++a) {
    const Tensor zi = column_block(state_.item_means, 0, num_items_, a * d, d);
    const Tensor fi = decode(zi, params_.item.decoder);
    Tensor zu(users.size(), d);
    for (std::size_t r = 0; r < users.size(); ++r) {
      if (users[r] >= num_users_) throw DimensionError("user index out of range");
      for (std::size_t k = 0; k < d; ++k) zu(r, k) = state_.user_means(users[r], a * d + k);
    }
    const Tensor fu = decode(zu, params_.user.decoder);
    Tensor skip = matmul(zu, zi, false, true);
    gemm(fu, false, fi, true, skip, true);
    for (std::size_t r = 0; r < users.size(); ++r) {
      const double pu = state_.user_probs(users[r], a);
      auto out = scores.row_span(r);
      auto s = skip.row_span(r);
      for (std::size_t i = 0; i < num_items_; ++i) {
        out[i] += pu * state_.item_probs(i, a) * sigmoid(s[i]);
      }
    }
  }
  return scores;
}

ScoreBreakdown Model::explain(Index user, Index item) const {
  if (user >= num_users_ || item >= num_items_) throw DimensionError("pair out of range");
  return joint_score(state_.user_means.row_span(user), state_.item_means.row_span(item),
                     state_.user_probs.row_span(user), state_.item_probs.row_span(item),
                     params_.user.decoder, params_.item.decoder);
}

}  // namespace dualvae
