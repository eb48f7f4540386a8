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

#include "dualvae/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "dualvae/errors.hpp"

namespace dualvae {
namespace {

bool is_integer(std::string_view s) {
  if (s.empty()) return false;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_numeric(std::string_view s) {
  if (is_integer(s)) return true;
  if (s.empty()) return false;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> tokenize(std::string_view line, std::string_view delim) {
  std::vector<std::string_view> out;
  if (delim.empty()) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + delim.size();
  }
  return out;
}

std::string_view detect_delimiter(std::string_view line, InputFormat format) {
  switch (format) {
    case InputFormat::kTsv:
      return "\t";
    case InputFormat::kCsv:
      return ",";
    case InputFormat::kAuto:
      break;
  }
  if (line.find("::") != std::string_view::npos) return "::";
  if (line.find('\t') != std::string_view::npos) return "\t";
  if (line.find(',') != std::string_view::npos) return ",";
  return {};  // whitespace
}

// Interns strings to dense ids in first-appearance order.
class Interner {
 public:
  Index intern(std::string_view s) {
    auto it = index_.find(std::string(s));
    if (it != index_.end()) return it->second;
    const Index id = static_cast<Index>(names_.size());
    names_.emplace_back(s);
    index_.emplace(names_.back(), id);
    return id;
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Index> index_;
};

// Ranks the surviving ids: numeric order when every id is an integer,
// byte order otherwise. Returns old index -> new index (or -1).
std::vector<std::int64_t> canonical_order(const std::vector<std::string>& names,
                                          const std::vector<bool>& alive,
                                          std::vector<std::string>& ordered) {
  std::vector<Index> keep;
  for (Index i = 0; i < names.size(); ++i)
    if (alive[i]) keep.push_back(i);
  const bool numeric = std::all_of(keep.begin(), keep.end(),
                                   [&](Index i) { return is_integer(names[i]); });
  if (numeric) {
    std::sort(keep.begin(), keep.end(), [&](Index a, Index b) {
      return std::stoll(names[a]) < std::stoll(names[b]);
    });
  } else {
    std::sort(keep.begin(), keep.end(), [&](Index a, Index b) { return names[a] < names[b]; });
  }
  std::vector<std::int64_t> remap(names.size(), -1);
  ordered.clear();
  for (std::size_t r = 0; r < keep.size(); ++r) {
    remap[keep[r]] = static_cast<std::int64_t>(r);
    ordered.push_back(names[keep[r]]);
  }
  return remap;
}

}  // namespace

InteractionMatrix::InteractionMatrix(std::size_t num_users, std::size_t num_items,
                                     std::vector<Pair> pairs) {
  for (const auto& [u, i] : pairs) {
    if (u >= num_users || i >= num_items) {
      throw DimensionError(fmt::format("interaction ({}, {}) outside {}x{} matrix", u, i,
                                       num_users, num_items));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  user_ptr_.assign(num_users + 1, 0);
  item_ptr_.assign(num_items + 1, 0);
  for (const auto& [u, i] : pairs) {
    ++user_ptr_[u + 1];
    ++item_ptr_[i + 1];
  }
  std::partial_sum(user_ptr_.begin(), user_ptr_.end(), user_ptr_.begin());
  std::partial_sum(item_ptr_.begin(), item_ptr_.end(), item_ptr_.begin());
  user_idx_.resize(pairs.size());
  item_idx_.resize(pairs.size());
  std::vector<std::size_t> ufill(user_ptr_.begin(), user_ptr_.end() - 1);
  std::vector<std::size_t> ifill(item_ptr_.begin(), item_ptr_.end() - 1);
  // pairs are sorted by (user, item), so both fills come out sorted.
  for (const auto& [u, i] : pairs) {
    user_idx_[ufill[u]++] = i;
    item_idx_[ifill[i]++] = u;
  }
}

std::span<const Index> InteractionMatrix::items_of(Index user) const {
  if (user >= num_users()) throw DimensionError(fmt::format("user {} out of range", user));
  return {user_idx_.data() + user_ptr_[user], user_ptr_[user + 1] - user_ptr_[user]};
}

std::span<const Index> InteractionMatrix::users_of(Index item) const {
  if (item >= num_items()) throw DimensionError(fmt::format("item {} out of range", item));
  return {item_idx_.data() + item_ptr_[item], item_ptr_[item + 1] - item_ptr_[item]};
}

bool InteractionMatrix::contains(Index user, Index item) const {
  auto row = items_of(user);
  return std::binary_search(row.begin(), row.end(), item);
}

std::vector<Pair> InteractionMatrix::pairs() const {
  std::vector<Pair> out;
  out.reserve(nnz());
  for (Index u = 0; u < num_users(); ++u)
    for (Index i : items_of(u)) out.emplace_back(u, i);
  return out;
}

InteractionMatrix InteractionMatrix::transposed() const {
  std::vector<Pair> flipped;
  flipped.reserve(nnz());
  for (const auto& [u, i] : pairs()) flipped.emplace_back(i, u);
  return InteractionMatrix(num_items(), num_users(), std::move(flipped));
}

std::int64_t IdMap::find(const std::string& id) const {
  auto it = std::find(ids.begin(), ids.end(), id);
  return it == ids.end() ? -1 : static_cast<std::int64_t>(it - ids.begin());
}

std::vector<Pair> k_core_filter(std::vector<Pair> pairs, std::size_t min_user_core,
                                std::size_t min_item_core) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  if (min_user_core <= 1 && min_item_core <= 1) return pairs;
  while (true) {
    std::unordered_map<Index, std::size_t> udeg, ideg;
    for (const auto& [u, i] : pairs) {
      ++udeg[u];
      ++ideg[i];
    }
    const std::size_t before = pairs.size();
    std::erase_if(pairs, [&](const Pair& p) {
      return udeg[p.first] < min_user_core || ideg[p.second] < min_item_core;
    });
    if (pairs.size() == before) return pairs;
  }
}

Dataset ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open interaction file '{}'", path.string()));

  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    lines.emplace_back(lineno, line);
  }
  if (lines.empty()) throw DataError(fmt::format("'{}' contains no interactions", path.string()));

  const std::string_view delim = detect_delimiter(lines.front().second, options.format);
  auto fields = [&](std::size_t k) {
    auto tok = tokenize(trim(lines[k].second), delim);
    if (tok.size() < 2 || tok[0].empty() || tok[1].empty()) {
      throw DataError(fmt::format("{}:{}: expected 'user{}item', got '{}'", path.string(),
                                  lines[k].first, delim.empty() ? " " : delim,
                                  lines[k].second));
    }
    return tok;
  };

  std::size_t first = 0;
  if (lines.size() >= 2) {
    auto head = fields(0);
    auto next = fields(1);
    const bool header = (!is_numeric(head[0]) && is_numeric(next[0])) ||
                        (!is_numeric(head[1]) && is_numeric(next[1]));
    if (header) first = 1;
  }

  Interner users, items;
  std::vector<Pair> pairs;
  pairs.reserve(lines.size());
  for (std::size_t k = first; k < lines.size(); ++k) {
    auto tok = fields(k);
    pairs.emplace_back(users.intern(tok[0]), items.intern(tok[1]));
  }

  pairs = k_core_filter(std::move(pairs), options.min_user_core, options.min_item_core);
  if (pairs.empty()) {
    throw DataError(fmt::format("no interactions left in '{}' after {}/{}-core filtering",
                                path.string(), options.min_user_core, options.min_item_core));
  }

  std::vector<bool> ualive(users.names().size(), false), ialive(items.names().size(), false);
  for (const auto& [u, i] : pairs) {
    ualive[u] = true;
    ialive[i] = true;
  }
  Dataset out;
  const auto uremap = canonical_order(users.names(), ualive, out.users.ids);
  const auto iremap = canonical_order(items.names(), ialive, out.items.ids);
  for (auto& [u, i] : pairs) {
    u = static_cast<Index>(uremap[u]);
    i = static_cast<Index>(iremap[i]);
  }
  out.matrix = InteractionMatrix(out.users.size(), out.items.size(), std::move(pairs));
  return out;
}

void write_id_map(const std::filesystem::path& path, const IdMap& map) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  for (std::size_t i = 0; i < map.ids.size(); ++i) out << map.ids[i] << '\t' << i << '\n';
}

IdMap read_id_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open id map '{}'", path.string()));
  IdMap map;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    auto tok = tokenize(trim(line), "\t");
    std::size_t index = 0;
    if (tok.size() != 2 || !is_integer(tok[1]) ||
        (index = std::stoull(std::string(tok[1]))) != map.ids.size()) {
      throw DataError(fmt::format("{}:{}: malformed id map line", path.string(), lineno));
    }
    map.ids.emplace_back(tok[0]);
  }
  return map;
}

void write_pairs(const std::filesystem::path& path, const InteractionMatrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& [u, i] : m.pairs()) out << u << '\t' << i << '\n';
}

InteractionMatrix read_pairs(const std::filesystem::path& path, std::size_t num_users,
                             std::size_t num_items) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::vector<Pair> pairs;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    auto tok = tokenize(trim(line), "\t");
    if (tok.size() < 2 || !is_integer(tok[0]) || !is_integer(tok[1])) {
      throw DataError(fmt::format("{}:{}: expected 'user<TAB>item' indices", path.string(),
                                  lineno));
    }
    const auto u = std::stoull(std::string(tok[0]));
    const auto i = std::stoull(std::string(tok[1]));
    if (u >= num_users || i >= num_items) {
      throw DataError(fmt::format("{}:{}: index out of range", path.string(), lineno));
    }
    pairs.emplace_back(static_cast<Index>(u), static_cast<Index>(i));
  }
  return InteractionMatrix(num_users, num_items, std::move(pairs));
}

void write_interactions(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& [u, i] : data.matrix.pairs())
    out << data.users.ids[u] << '\t' << data.items.ids[i] << '\n';
}

DatasetSplit split(const InteractionMatrix& matrix, double train_ratio, double valid_fraction,
                   std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw ConfigError(fmt::format("train_ratio must lie in (0,1), got {}", train_ratio));
  }
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw ConfigError(fmt::format("valid_fraction must lie in (0,1), got {}", valid_fraction));
  }
  Rng rng(seed);
  std::vector<Pair> train, held_out;
  for (Index u = 0; u < matrix.num_users(); ++u) {
    auto row = matrix.items_of(u);
    std::vector<Index> items(row.begin(), row.end());
    std::size_t n_test = 0;
    if (items.size() >= 2) {
      // The epsilon keeps e.g. 10 * (1 - 0.8) = 1.9999999999999996 at 2.
      n_test = static_cast<std::size_t>(
          std::floor(static_cast<double>(items.size()) * (1.0 - train_ratio) + 1e-9));
    }
    rng.shuffle(std::span<Index>(items));
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (k < n_test)
        held_out.emplace_back(u, items[k]);
      else
        train.emplace_back(u, items[k]);
    }
  }
  const auto n_valid = static_cast<std::size_t>(
      std::floor(static_cast<double>(held_out.size()) * valid_fraction + 1e-9));
  rng.shuffle(std::span<Pair>(held_out));
  std::vector<Pair> valid(held_out.begin(), held_out.begin() + n_valid);
  std::vector<Pair> test(held_out.begin() + n_valid, held_out.end());

  DatasetSplit out;
  out.seed = seed;
  out.train = InteractionMatrix(matrix.num_users(), matrix.num_items(), std::move(train));
  out.valid = InteractionMatrix(matrix.num_users(), matrix.num_items(), std::move(valid));
  out.test = InteractionMatrix(matrix.num_users(), matrix.num_items(), std::move(test));
  return out;
}

Tensor Batch::slab(const InteractionMatrix& matrix) const {
  const std::size_t width = matrix.count(other(side));
  Tensor out(entities.size(), width);
  for (std::size_t r = 0; r < entities.size(); ++r)
    for (Index j : matrix.neighbors(side, entities[r])) out(r, j) = 1.0;
  return out;
}

std::vector<Batch> make_batches(const InteractionMatrix& matrix, Side side,
                                std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  std::vector<Index> order(matrix.count(side));
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(std::span<Index>(order));
  std::vector<Batch> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    Batch b;
    b.side = side;
    const std::size_t end = std::min(order.size(), start + batch_size);
    b.entities.assign(order.begin() + start, order.begin() + end);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<double> densify(const InteractionMatrix& matrix, Side side, Index entity) {
  std::vector<double> out(matrix.count(other(side)), 0.0);
  for (Index j : matrix.neighbors(side, entity)) out[j] = 1.0;
  return out;
}

NeighborSets neighbor_sets(const InteractionMatrix& train) {
  NeighborSets ns;
  ns.of_user.resize(train.num_users());
  ns.of_item.resize(train.num_items());
  for (Index u = 0; u < train.num_users(); ++u) {
    auto row = train.items_of(u);
    ns.of_user[u].assign(row.begin(), row.end());
  }
  for (Index i = 0; i < train.num_items(); ++i) {
    auto col = train.users_of(i);
    ns.of_item[i].assign(col.begin(), col.end());
  }
  return ns;
}

}  // namespace dualvae
