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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dualvae/rng.hpp"
#include "dualvae/tensor.hpp"

namespace dualvae {

// Which side of the bipartite interaction graph an operation acts on.
enum class Side { kUser, kItem };

inline Side other(Side s) { return s == Side::kUser ? Side::kItem : Side::kUser; }
inline const char* side_name(Side s) { return s == Side::kUser ? "user" : "item"; }

using Index = std::uint32_t;
using Pair = std::pair<Index, Index>;  // (user, item)

/// Sparse binary user x item matrix with both row (per-user) and column
/// (per-item) adjacency lists, each sorted ascending. Duplicate pairs are
/// collapsed on construction; every stored entry is an implicit 1.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;
  InteractionMatrix(std::size_t num_users, std::size_t num_items,
                    std::vector<Pair> pairs);

  std::size_t num_users() const { return user_ptr_.empty() ? 0 : user_ptr_.size() - 1; }
  std::size_t num_items() const { return item_ptr_.empty() ? 0 : item_ptr_.size() - 1; }
  std::size_t count(Side s) const { return s == Side::kUser ? num_users() : num_items(); }
  std::size_t nnz() const { return user_idx_.size(); }

  std::span<const Index> items_of(Index user) const;
  std::span<const Index> users_of(Index item) const;
  // Adjacency of an entity on the given side: items for a user, users for an
  // item.
  std::span<const Index> neighbors(Side s, Index entity) const {
    return s == Side::kUser ? items_of(entity) : users_of(entity);
  }
  bool contains(Index user, Index item) const;

  std::vector<Pair> pairs() const;  // sorted by (user, item)
  InteractionMatrix transposed() const;

  friend bool operator==(const InteractionMatrix& a, const InteractionMatrix& b) {
    return a.user_ptr_ == b.user_ptr_ && a.user_idx_ == b.user_idx_ &&
           a.item_ptr_ == b.item_ptr_ && a.item_idx_ == b.item_idx_;
  }

 private:
  std::vector<std::size_t> user_ptr_{0};
  std::vector<Index> user_idx_;
  std::vector<std::size_t> item_ptr_{0};
  std::vector<Index> item_idx_;
};

// Original string id for every contiguous index on one side.
struct IdMap {
  std::vector<std::string> ids;
  std::size_t size() const { return ids.size(); }
  // Index of an original id, or -1.
  std::int64_t find(const std::string& id) const;
};

struct Dataset {
  InteractionMatrix matrix;
  IdMap users;
  IdMap items;
};

enum class InputFormat { kAuto, kTsv, kCsv };

struct IngestOptions {
  InputFormat format = InputFormat::kAuto;
  std::size_t min_user_core = 0;
  std::size_t min_item_core = 0;
};

/// Reads `user item [ignored...]` lines. The delimiter is a tab, a comma, or
/// `::` (auto-detected from the first data line unless a format is forced).
/// A first line whose id token is non-numeric while the same column of the
/// second line is numeric is treated as a header. After iterative k-core
/// filtering, surviving users and items are indexed contiguously in
/// ascending order of their original id (numeric order when every id is an
/// integer, byte order otherwise), so the result does not depend on line
/// order.
Dataset ingest(const std::filesystem::path& path, const IngestOptions& options = {});

// Repeatedly drops users with fewer than `min_user_core` interactions and
// items with fewer than `min_item_core` until nothing changes. Returns the
// surviving pairs.
std::vector<Pair> k_core_filter(std::vector<Pair> pairs, std::size_t min_user_core,
                                std::size_t min_item_core);

void write_id_map(const std::filesystem::path& path, const IdMap& map);
IdMap read_id_map(const std::filesystem::path& path);
// Index-space interaction list, one `user<TAB>item` pair per line.
void write_pairs(const std::filesystem::path& path, const InteractionMatrix& m);
InteractionMatrix read_pairs(const std::filesystem::path& path, std::size_t num_users,
                             std::size_t num_items);
// Interactions written back with original ids, `user<TAB>item` per line.
void write_interactions(const std::filesystem::path& path, const Dataset& data);

struct DatasetSplit {
  InteractionMatrix train;
  InteractionMatrix valid;
  InteractionMatrix test;
  std::uint64_t seed = 0;
};

/// Per-user random holdout. A user with k >= 2 interactions keeps
/// k - floor(k * (1 - train_ratio)) of them for training; users with a
/// single interaction keep it in train. A `valid_fraction` share of the
/// pooled held-out interactions (rounded down) is then moved to validation;
/// the rest is the test set.
DatasetSplit split(const InteractionMatrix& matrix, double train_ratio = 0.8,
                   double valid_fraction = 0.1, std::uint64_t seed = 0);

// Entity indices of one minibatch on one side.
struct Batch {
  Side side = Side::kUser;
  std::vector<Index> entities;

  // Dense |batch| x (other side count) slab of the given matrix.
  Tensor slab(const InteractionMatrix& matrix) const;
};

// Shuffles all entities of `side` with `rng` and cuts them into batches of
// `batch_size`; the last batch may be smaller.
std::vector<Batch> make_batches(const InteractionMatrix& matrix, Side side,
                                std::size_t batch_size, Rng& rng);

// Dense row (user side) or column (item side) of the matrix.
std::vector<double> densify(const InteractionMatrix& matrix, Side side, Index entity);

// Train-split adjacency in both directions.
struct NeighborSets {
  std::vector<std::vector<Index>> of_user;
  std::vector<std::vector<Index>> of_item;

  const std::vector<Index>& of(Side s, Index e) const {
    return s == Side::kUser ? of_user[e] : of_item[e];
  }
};

NeighborSets neighbor_sets(const InteractionMatrix& train);

}  // namespace dualvae
