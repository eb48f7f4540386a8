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

#include "dualvae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "dualvae/errors.hpp"

namespace dualvae {

namespace {

constexpr std::size_t kUserBlock = 256;

bool contains_sorted(std::span<const Index> sorted, Index v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

Tensor score_all(const Model& model, std::span<const Index> users) {
  Tensor out(users.size(), model.num_items());
  for (std::size_t start = 0; start < users.size(); start += kUserBlock) {
    const std::size_t count = std::min(kUserBlock, users.size() - start);
    const Tensor block = model.score_users(users.subspan(start, count));
    std::copy(block.data().begin(), block.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(start * model.num_items()));
  }
  return out;
}

void mask_scores(Tensor& scores, std::span<const Index> users,
                 std::span<const InteractionMatrix* const> masks) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < users.size(); ++r) {
    auto row = scores.row_span(r);
    for (const InteractionMatrix* m : masks) {
      for (Index i : m->items_of(users[r])) row[i] = neg_inf;
    }
  }
}

std::vector<Index> top_n(std::span<const double> scores, std::size_t n) {
  std::vector<Index> idx;
  idx.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isfinite(scores[i])) idx.push_back(static_cast<Index>(i));
  }
  const std::size_t k = std::min(n, idx.size());
  auto better = [&](Index a, Index b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

double recall_at_n(std::span<const Index> ranked, std::span<const Index> relevant, std::size_t n) {
  if (relevant.empty()) throw DomainError("recall needs at least one relevant item");
  const std::size_t k = std::min(n, ranked.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k; ++r) hits += contains_sorted(relevant, ranked[r]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(std::min(n, relevant.size()));
}

double ndcg_at_n(std::span<const Index> ranked, std::span<const Index> relevant, std::size_t n) {
  if (relevant.empty()) throw DomainError("NDCG needs at least one relevant item");
  const std::size_t k = std::min(n, ranked.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    if (contains_sorted(relevant, ranked[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(n, relevant.size()); ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg / idcg;
}

RankingResult evaluate(const Model& model, const InteractionMatrix& target,
                       const EvalOptions& options) {
  if (options.cutoffs.empty()) throw ConfigError("no evaluation cutoffs");
  if (target.num_users() != model.num_users() || target.num_items() != model.num_items()) {
    throw DimensionError("evaluation matrix does not match the model");
  }
  for (const InteractionMatrix* m : options.masks) {
    if (m->num_users() != model.num_users() || m->num_items() != model.num_items()) {
      throw DimensionError("mask matrix does not match the model");
    }
  }
  const std::size_t max_n = *std::max_element(options.cutoffs.begin(), options.cutoffs.end());
  RankingResult res;
  for (std::size_t u = 0; u < target.num_users(); ++u) {
    if (!target.items_of(static_cast<Index>(u)).empty()) res.users.push_back(static_cast<Index>(u));
  }
  res.recall.assign(options.cutoffs.size(), {});
  res.ndcg.assign(options.cutoffs.size(), {});
  for (std::size_t start = 0; start < res.users.size(); start += kUserBlock) {
    const std::size_t count = std::min(kUserBlock, res.users.size() - start);
    std::span<const Index> block(res.users.data() + start, count);
    Tensor scores = model.score_users(block);
    mask_scores(scores, block, options.masks);
    for (std::size_t r = 0; r < count; ++r) {
      auto top = top_n(scores.row_span(r), max_n);
      auto relevant = target.items_of(block[r]);
      for (std::size_t c = 0; c < options.cutoffs.size(); ++c) {
        res.recall[c].push_back(recall_at_n(top, relevant, options.cutoffs[c]));
        res.ndcg[c].push_back(ndcg_at_n(top, relevant, options.cutoffs[c]));
      }
      res.top.push_back(std::move(top));
    }
  }
  auto macro = [&](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  for (std::size_t c = 0; c < options.cutoffs.size(); ++c) {
    res.rows.push_back({"recall", options.cutoffs[c], macro(res.recall[c]), res.users.size()});
  }
  for (std::size_t c = 0; c < options.cutoffs.size(); ++c) {
    res.rows.push_back({"ndcg", options.cutoffs[c], macro(res.ndcg[c]), res.users.size()});
  }
  return res;
}

double validation_recall(const Model& model, const InteractionMatrix& train,
                         const InteractionMatrix& target, std::size_t n) {
  EvalOptions opts;
  opts.cutoffs = {n};
  opts.masks = {&train};
  return evaluate(model, target, opts).rows.front().value;
}

std::string format_metrics_tsv(const std::vector<MetricRow>& rows) {
  std::string out = "metric\tN\tvalue\tn_users\n";
  for (const auto& r : rows) out += fmt::format("{}\t{}\t{}\t{}\n", r.metric, r.n, r.value, r.n_users);
  return out;
}

void write_metrics_tsv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_metrics_tsv(rows);
}

}  // namespace dualvae
