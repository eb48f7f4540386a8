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
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "dualvae/tensor.hpp"

namespace dualvae {

/// Seedable random source with a fixed, documented algorithm.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the C++
/// standard. Everything layered on top (uniform doubles, bounded integers,
/// normals, shuffles) is implemented here instead of through the
/// implementation-defined <random> distributions, so a seed reproduces the
/// same stream on every platform and standard library.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+box-muller";

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n); unbiased via rejection.
  std::uint64_t below(std::uint64_t n);
  double normal();
  Tensor standard_normal(std::size_t rows, std::size_t cols);
  Tensor normal(std::size_t rows, std::size_t cols, double stddev);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // Full engine state (including a cached Box-Muller deviate) as text, for
  // checkpoints.
  std::string state() const;
  void restore(std::string_view state);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dualvae
