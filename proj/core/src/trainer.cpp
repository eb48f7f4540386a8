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

#include "dualvae/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dualvae/errors.hpp"
#include "dualvae/eval.hpp"

namespace dualvae {

namespace {

void round_to_float(Tensor& t) {
  for (double& v : t.data()) v = static_cast<double>(static_cast<float>(v));
}

const SideVars& vars_of(const ModelVars& v, Side s) { return v.side(s); }

std::vector<Var> side_vars(const SideVars& v) {
  return {v.encoder.w1, v.encoder.b1, v.encoder.w2, v.encoder.b2,
          v.decoder.w,  v.decoder.b,  v.prototypes};
}

}  // namespace

Trainer::Trainer(const DatasetSplit& split, const TrainConfig& config)
    : split_(&split), config_(config), rng_(config.seed) {
  config_.validate();
  model_ = Model::init(config_.model, split.train.num_users(), split.train.num_items(), rng_);
  if (config_.precision == Precision::kF32) {
    for (Side side : {Side::kUser, Side::kItem}) {
      for (auto& [name, t] : named_params(model_.params().side(side), side)) round_to_float(*t);
    }
  }
  model_.refresh_means(Side::kUser, split.train);
  model_.refresh_means(Side::kItem, split.train);
}

double Trainer::beta_for_epoch(std::size_t epoch) const {
  const double beta = config_.model.beta;
  if (config_.beta_anneal_epochs == 0) return beta;
  return beta * std::min(1.0, static_cast<double>(epoch) /
                                  static_cast<double>(config_.beta_anneal_epochs));
}

PhaseStats Trainer::run_phase(Side side, double beta) {
  const InteractionMatrix& train = split_->train;
  const ModelConfig& mc = config_.model;
  AdamOptions opts;
  opts.lr = config_.lr;
  PhaseStats stats;
  std::size_t seen = 0;
  auto batches = make_batches(train, side, config_.batch_size, rng_);
  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const Batch& batch = batches[bi];
    const Tensor slab = batch.slab(train);
    std::vector<Tensor> noise;
    for (std::size_t a = 0; a < mc.aspects; ++a) {
      noise.push_back(rng_.standard_normal(batch.entities.size(), mc.dim));
    }
    Tape tape;
    ModelVars vars = register_params(tape, model_.params());
    PhaseInputs in;
    in.side = side;
    in.slab = &slab;
    in.other_means = &model_.state().means(other(side));
    in.other_probs = &model_.state().probs(other(side));
    in.noise = noise;
    in.beta = beta;
    PhaseGraph g;
    try {
      g = build_phase_objective(tape, mc, vars, model_.params(), in);
      tape.backward(g.loss);
    } catch (const NumericError& e) {
      throw NumericError(fmt::format("epoch {} {} phase batch {}: {}", epoch_ + 1, side_name(side),
                                     bi, e.what()));
    }
    if (hook_) hook_(side, tape, vars);

    for (Var v : side_vars(vars_of(vars, other(side)))) {
      const Tensor grad = tape.grad(v);
      for (double x : grad.data()) {
        stats.frozen_grad_max = std::max(stats.frozen_grad_max, std::abs(x));
      }
    }

    const auto own_vars = side_vars(vars_of(vars, side));
    auto own_params = named_params(model_.params().side(side), side);
    for (std::size_t k = 0; k < own_params.size(); ++k) {
      auto& [name, param] = own_params[k];
      try {
        adam_step(*param, tape.grad(own_vars[k]), adam_[name], opts, name);
      } catch (const NumericError& e) {
        throw NumericError(fmt::format("epoch {} {} phase batch {}: {}", epoch_ + 1,
                                       side_name(side), bi, e.what()));
      }
      if (config_.precision == Precision::kF32) round_to_float(*param);
    }

    const double b = static_cast<double>(batch.entities.size());
    stats.loss += tape.value(g.loss).item() * b;
    stats.recon += tape.value(g.recon).item();
    stats.kl += tape.value(g.kl).item();
    stats.contrast += tape.value(g.contrast).item() * b;
    seen += batch.entities.size();
    ++stats.batches;
  }
  if (seen > 0) {
    const double n = static_cast<double>(seen);
    stats.loss /= n;
    stats.recon /= n;
    stats.kl /= n;
    stats.contrast /= n;
  }
  return stats;
}

EpochStats Trainer::train_epoch_pair() {
  EpochStats stats;
  stats.epoch = epoch_ + 1;
  stats.beta = beta_for_epoch(stats.epoch);

  stats.user = run_phase(Side::kUser, stats.beta);
  model_.refresh_means(Side::kUser, split_->train);
  model_.refresh_probs(Side::kUser);

  stats.item = run_phase(Side::kItem, stats.beta);
  model_.refresh_means(Side::kItem, split_->train);
  model_.refresh_probs(Side::kItem);

  stats.val_recall = validation_recall(model_, split_->train, split_->valid, 20);
  epoch_ = stats.epoch;
  return stats;
}

Checkpoint Trainer::snapshot(double best_metric, const std::string& fingerprint) const {
  Checkpoint c;
  c.model = model_;
  c.config = config_;
  c.rng_state = rng_.state();
  c.epoch = epoch_;
  c.best_metric = best_metric;
  c.data_fingerprint = fingerprint;
  return c;
}

FitResult fit(const DatasetSplit& split, const TrainConfig& config, const FitOptions& options) {
  Trainer trainer(split, config);
  if (options.batch_hook) trainer.set_batch_hook(options.batch_hook);
  FitResult result;
  bool have_best = false;
  double best = 0.0;
  std::size_t stale = 0;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    EpochStats stats = trainer.train_epoch_pair();
    if (!have_best || stats.val_recall > best) {
      best = stats.val_recall;
      result.best = trainer.snapshot(best, options.data_fingerprint);
      have_best = true;
      stale = 0;
    } else {
      ++stale;
    }
    spdlog::debug("epoch {} user loss {:.5f} item loss {:.5f} val R@20 {:.5f}", stats.epoch,
                  stats.user.loss, stats.item.loss, stats.val_recall);
    result.history.push_back(stats);
    if (options.on_epoch) options.on_epoch(stats);
    if (stale >= config.patience) break;
  }
  if (!have_best) result.best = trainer.snapshot(0.0, options.data_fingerprint);
  return result;
}

void write_log_header(std::ostream& out) {
  out << "epoch\tphase\tloss\trecon\tkl\tcontrast\tval_r20\n";
}

void write_log_rows(std::ostream& out, const EpochStats& s) {
  for (const auto& [name, p] : {std::pair{"user", &s.user}, std::pair{"item", &s.item}}) {
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", s.epoch, name, p->loss, p->recon, p->kl,
                       p->contrast, s.val_recall);
  }
}

}  // namespace dualvae
