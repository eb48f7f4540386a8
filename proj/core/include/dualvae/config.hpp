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
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dualvae/model.hpp"

namespace dualvae {

enum class Precision { kF64, kF32 };

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-3;
  std::size_t batch_size = 128;
  std::size_t epochs = 50;
  std::size_t patience = 10;
  // Linear KL warm-up length in epochs; 0 keeps beta constant.
  std::size_t beta_anneal_epochs = 0;
  std::uint64_t seed = 0;
  bool deterministic = true;
  // kF32 rounds parameters to single precision after every update; all
  // arithmetic stays in double.
  Precision precision = Precision::kF64;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct RunConfig {
  TrainConfig train;
  std::filesystem::path data_dir;
  std::filesystem::path output_dir = "out";
  double train_ratio = 0.8;
  double valid_fraction = 0.1;
  std::size_t min_user_core = 0;
  std::size_t min_item_core = 0;
  std::vector<std::size_t> cutoffs{20, 50};

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ConfigKeyInfo {
  std::string key;  // section.name
  std::string description;
  bool train_key;   // part of TrainConfig (stored in checkpoints)
};

// Every accepted key in file order.
const std::vector<ConfigKeyInfo>& config_keys();

std::string get_config_value(const RunConfig& cfg, std::string_view key);
// Throws ConfigError for an unknown key or a malformed value.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// INI text with [data] [model] [contrast] [train] [eval] sections. Keys
/// missing from the text keep their defaults; unknown sections or keys are
/// rejected.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& cfg);

// TrainConfig as flat key/value pairs and back.
std::vector<std::pair<std::string, std::string>> train_config_entries(const TrainConfig& cfg);
TrainConfig train_config_from_entries(
    const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace dualvae
