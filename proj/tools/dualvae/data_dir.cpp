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

#include "data_dir.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "dualvae/errors.hpp"

namespace dualvae::cli {

namespace fs = std::filesystem;

namespace {

fs::path require(const fs::path& dir, const char* name) {
  fs::path p = dir / name;
  if (!fs::exists(p)) throw DataError("missing data file " + p.string());
  return p;
}

}  // namespace

void write_data_dir(const fs::path& dir, const IdMap& users, const IdMap& items,
                    const DatasetSplit& split, const PlantedWorld* world) {
  fs::create_directories(dir);
  write_id_map(dir / "users.tsv", users);
  write_id_map(dir / "items.tsv", items);
  write_pairs(dir / "train.tsv", split.train);
  write_pairs(dir / "valid.tsv", split.valid);
  write_pairs(dir / "test.tsv", split.test);
  if (world != nullptr) {
    std::ofstream out(dir / "planted.tsv");
    if (!out) throw DataError("cannot write " + (dir / "planted.tsv").string());
    for (std::size_t u = 0; u < world->user_aspect.size(); ++u) {
      out << "user\t" << u << '\t' << world->user_aspect[u] << '\n';
    }
    for (std::size_t i = 0; i < world->item_aspect.size(); ++i) {
      out << "item\t" << i << '\t' << world->item_aspect[i] << '\n';
    }
  }
}

DataDir read_data_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("data directory " + dir.string() + " does not exist");
  DataDir d;
  d.users = read_id_map(require(dir, "users.tsv"));
  d.items = read_id_map(require(dir, "items.tsv"));
  const std::size_t m = d.users.size(), n = d.items.size();
  d.split.train = read_pairs(require(dir, "train.tsv"), m, n);
  d.split.valid = read_pairs(require(dir, "valid.tsv"), m, n);
  d.split.test = read_pairs(require(dir, "test.tsv"), m, n);
  const fs::path planted = dir / "planted.tsv";
  if (fs::exists(planted)) {
    std::ifstream in(planted);
    d.planted_users.assign(m, 0);
    d.planted_items.assign(n, 0);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string side;
      std::size_t index = 0, aspect = 0;
      if (!(fields >> side >> index >> aspect) || (side != "user" && side != "item") ||
          index >= (side == "user" ? m : n)) {
        throw DataError(planted.string() + ":" + std::to_string(line_no) + ": malformed line");
      }
      (side == "user" ? d.planted_users : d.planted_items)[index] = aspect;
    }
  }
  return d;
}

}  // namespace dualvae::cli
