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
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dualvae/adam.hpp"
#include "dualvae/checkpoint.hpp"
#include "dualvae/config.hpp"
#include "dualvae/data.hpp"
#include "dualvae/model.hpp"
#include "dualvae/objective.hpp"
#include "dualvae/rng.hpp"
#include "dualvae/tape.hpp"

namespace dualvae {

// Per-entity averages over one phase.
struct PhaseStats {
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double contrast = 0.0;
  std::size_t batches = 0;
  // Largest |gradient| seen on any parameter of the frozen side.
  double frozen_grad_max = 0.0;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double beta = 1.0;
  PhaseStats user;
  PhaseStats item;
  double val_recall = 0.0;  // Recall@20 on the validation split
};

/// Alternating optimizer. Each epoch is a user phase (item side and C
/// frozen) followed by an item phase (user side and P frozen); posterior
/// means and aspect probabilities of a side are refreshed right after its
/// phase, so they change only at phase boundaries.
class Trainer {
 public:
  using BatchHook = std::function<void(Side phase, const Tape& tape, const ModelVars& vars)>;

  Trainer(const DatasetSplit& split, const TrainConfig& config);

  // One user phase, one item phase, validation.
  EpochStats train_epoch_pair();

  const Model& model() const { return model_; }
  std::size_t epoch() const { return epoch_; }
  const Rng& rng() const { return rng_; }

  // Called after every backward pass, before the parameter update.
  void set_batch_hook(BatchHook hook) { hook_ = std::move(hook); }

  Checkpoint snapshot(double best_metric, const std::string& fingerprint) const;

 private:
  PhaseStats run_phase(Side side, double beta);
  double beta_for_epoch(std::size_t epoch) const;

  const DatasetSplit* split_;
  TrainConfig config_;
  Rng rng_;
  Model model_;
  std::map<std::string, AdamState> adam_;
  std::size_t epoch_ = 0;
  BatchHook hook_;
};

struct FitOptions {
  std::string data_fingerprint;
  std::function<void(const EpochStats&)> on_epoch;
  Trainer::BatchHook batch_hook;
};

struct FitResult {
  Checkpoint best;
  std::vector<EpochStats> history;
};

// Trains until `epochs` or until `patience` consecutive epochs fail to beat
// the best validation Recall@20; returns the best snapshot.
FitResult fit(const DatasetSplit& split, const TrainConfig& config, const FitOptions& options = {});

// Training log: header `epoch phase loss recon kl contrast val_r20`, then one
// row per phase.
void write_log_header(std::ostream& out);
void write_log_rows(std::ostream& out, const EpochStats& stats);

}  // namespace dualvae
