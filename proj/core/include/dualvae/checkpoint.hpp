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

#include "dualvae/config.hpp"
#include "dualvae/model.hpp"

namespace dualvae {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  TrainConfig config;
  std::string rng_state;
  std::size_t epoch = 0;
  double best_metric = 0.0;
  std::string data_fingerprint;
};

/// Binary layout, all integers little-endian:
///
///   "DVAECKPT"  u32 version
///   u32 length, UTF-8 `key=value` lines (configuration and run metadata)
///   u32 tensor count, then per tensor:
///     u16 name length, name, u8 dtype (0 = f64, 1 = f32), u32 rank,
///     rank x u64 dims, payload
///
/// Parameters are written as f32 when the run used single precision; they
/// are widened to double on load. Aspect probabilities and means are always
/// f64.
std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws FormatError on bad magic, an unsupported version or truncation.
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dualvae
