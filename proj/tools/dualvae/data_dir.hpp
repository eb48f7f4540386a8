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

#include <filesystem>
#include <vector>

#include "dualvae/data.hpp"
#include "dualvae/synth.hpp"

namespace dualvae::cli {

// On-disk layout written by `ingest` and read by every other command:
//   users.tsv, items.tsv      original id <TAB> index
//   train.tsv, valid.tsv, test.tsv   index pairs
//   planted.tsv               side <TAB> index <TAB> aspect (synthetic only)
struct DataDir {
  IdMap users;
  IdMap items;
  DatasetSplit split;
  // Planted aspect per user and item; empty unless synthetic.
  std::vector<std::size_t> planted_users;
  std::vector<std::size_t> planted_items;
};

void write_data_dir(const std::filesystem::path& dir, const IdMap& users, const IdMap& items,
                    const DatasetSplit& split, const PlantedWorld* world);
DataDir read_data_dir(const std::filesystem::path& dir);

}  // namespace dualvae::cli
