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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dualvae/data.hpp"
#include "dualvae/model.hpp"

namespace dualvae {

// Eval-mode scores of `users` against all items, computed in user blocks.
Tensor score_all(const Model& model, std::span<const Index> users);

// Sets the score of every interaction of each user in `masks` to -infinity.
void mask_scores(Tensor& scores, std::span<const Index> users,
                 std::span<const InteractionMatrix* const> masks);

// Indices of the n largest finite scores, descending, ties by ascending
// index. Fewer than n are returned when fewer finite scores exist.
std::vector<Index> top_n(std::span<const double> scores, std::size_t n);

// |top-n ∩ relevant| / min(n, |relevant|). `relevant` must be non-empty.
double recall_at_n(std::span<const Index> ranked, std::span<const Index> relevant, std::size_t n);
// DCG / IDCG with gain 1 / log2(rank + 1).
double ndcg_at_n(std::span<const Index> ranked, std::span<const Index> relevant, std::size_t n);

struct MetricRow {
  std::string metric;  // "recall" or "ndcg"
  std::size_t n = 0;
  double value = 0.0;
  std::size_t n_users = 0;
};

struct RankingResult {
  std::vector<Index> users;                 // users with at least one target item
  std::vector<std::vector<Index>> top;      // per user, length max(cutoffs)
  std::vector<std::vector<double>> recall;  // [cutoff][user]
  std::vector<std::vector<double>> ndcg;
  std::vector<MetricRow> rows;              // macro averages, recall then ndcg per cutoff
};

struct EvalOptions {
  std::vector<std::size_t> cutoffs{20, 50};
  // Interactions excluded from ranking (train, plus validation when testing).
  std::vector<const InteractionMatrix*> masks;
};

RankingResult evaluate(const Model& model, const InteractionMatrix& target,
                       const EvalOptions& options);

// Macro Recall@n of `target`, masking `train`; 0 when no user has targets.
double validation_recall(const Model& model, const InteractionMatrix& train,
                         const InteractionMatrix& target, std::size_t n = 20);

// `metric N value n_users` with a header line.
void write_metrics_tsv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);
std::string format_metrics_tsv(const std::vector<MetricRow>& rows);

}  // namespace dualvae
