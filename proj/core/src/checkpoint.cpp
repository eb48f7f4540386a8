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

#include "dualvae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "dualvae/errors.hpp"
#include "dualvae/rng.hpp"

namespace dualvae {

namespace {

constexpr std::string_view kMagic = "DVAECKPT";
constexpr std::uint8_t kDtypeF64 = 0;
constexpr std::uint8_t kDtypeF32 = 1;

class Writer {
 public:
  template <typename T>
  void uint(T v) {
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * b)) & 0xff));
    }
  }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T uint() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw FormatError(fmt::format("checkpoint truncated at byte {}", pos_));
    }
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_tensor(Writer& w, const std::string& name, const Tensor& t, bool f32) {
  w.uint<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
  w.bytes(name);
  w.uint<std::uint8_t>(f32 ? kDtypeF32 : kDtypeF64);
  w.uint<std::uint32_t>(2);
  w.uint<std::uint64_t>(t.rows());
  w.uint<std::uint64_t>(t.cols());
  for (double v : t.data()) {
    if (f32) w.uint<std::uint32_t>(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    else w.uint<std::uint64_t>(std::bit_cast<std::uint64_t>(v));
  }
}

std::pair<std::string, Tensor> read_tensor(Reader& r) {
  const auto name_len = r.uint<std::uint16_t>();
  std::string name(r.bytes(name_len));
  const auto dtype = r.uint<std::uint8_t>();
  if (dtype != kDtypeF64 && dtype != kDtypeF32) {
    throw FormatError(fmt::format("tensor '{}' has unknown dtype {}", name, dtype));
  }
  const auto rank = r.uint<std::uint32_t>();
  if (rank != 2) throw FormatError(fmt::format("tensor '{}' has rank {}, expected 2", name, rank));
  const auto rows = r.uint<std::uint64_t>();
  const auto cols = r.uint<std::uint64_t>();
  if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) {
    throw FormatError(fmt::format("tensor '{}' is implausibly large", name));
  }
  std::vector<double> data(rows * cols);
  for (double& v : data) {
    if (dtype == kDtypeF32) v = static_cast<double>(std::bit_cast<float>(r.uint<std::uint32_t>()));
    else v = std::bit_cast<double>(r.uint<std::uint64_t>());
  }
  return {std::move(name), Tensor(rows, cols, std::move(data))};
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const Model& model = ckpt.model;
  std::string config;
  auto kv = [&](const std::string& k, const std::string& v) {
    if (v.find('\n') != std::string::npos) throw ContractError("config value contains a newline");
    config += k + "=" + v + "\n";
  };
  for (const auto& [k, v] : train_config_entries(ckpt.config)) kv(k, v);
  kv("meta.num_users", std::to_string(model.num_users()));
  kv("meta.num_items", std::to_string(model.num_items()));
  kv("meta.epoch", std::to_string(ckpt.epoch));
  kv("meta.best_metric", fmt::format("{}", ckpt.best_metric));
  kv("meta.fingerprint", ckpt.data_fingerprint);
  kv("meta.rng_algorithm", std::string(Rng::kAlgorithm));
  kv("meta.rng_state", ckpt.rng_state);

  Writer w;
  w.bytes(kMagic);
  w.uint<std::uint32_t>(kCheckpointVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(config.size()));
  w.bytes(config);

  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for (Side side : {Side::kUser, Side::kItem}) {
    for (auto& entry : named_params(model.params().side(side), side)) tensors.push_back(entry);
  }
  const std::size_t num_params = tensors.size();
  tensors.emplace_back("state.user_probs", &model.state().user_probs);
  tensors.emplace_back("state.item_probs", &model.state().item_probs);
  tensors.emplace_back("state.user_means", &model.state().user_means);
  tensors.emplace_back("state.item_means", &model.state().item_means);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  const bool f32 = ckpt.config.precision == Precision::kF32;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    write_tensor(w, tensors[k].first, *tensors[k].second, f32 && k < num_params);
  }
  return w.take();
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError(fmt::format("checkpoint version {} is not supported (expected {})", version,
                                  kCheckpointVersion));
  }
  const auto config_len = r.uint<std::uint32_t>();
  std::istringstream lines{std::string(r.bytes(config_len))};

  Checkpoint ckpt;
  std::vector<std::pair<std::string, std::string>> train_kv;
  std::map<std::string, std::string> meta;
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("malformed config line '" + line + "'");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key.rfind("meta.", 0) == 0) meta[key] = value;
    else train_kv.emplace_back(std::move(key), std::move(value));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw FormatError("checkpoint lacks " + key);
    return it->second;
  };
  try {
    ckpt.config = train_config_from_entries(train_kv);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  if (need("meta.rng_algorithm") != Rng::kAlgorithm) {
    throw FormatError("checkpoint uses RNG '" + need("meta.rng_algorithm") + "'");
  }
  std::size_t num_users = 0, num_items = 0;
  try {
    num_users = std::stoull(need("meta.num_users"));
    num_items = std::stoull(need("meta.num_items"));
    ckpt.epoch = std::stoull(need("meta.epoch"));
    ckpt.best_metric = std::stod(need("meta.best_metric"));
  } catch (const std::logic_error&) {
    throw FormatError("checkpoint metadata is malformed");
  }
  ckpt.data_fingerprint = need("meta.fingerprint");
  ckpt.rng_state = need("meta.rng_state");

  std::map<std::string, Tensor> tensors;
  const auto count = r.uint<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    auto [name, t] = read_tensor(r);
    tensors[name] = std::move(t);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint tensors");
  auto take = [&](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("checkpoint lacks tensor " + name);
    return std::move(it->second);
  };
  ModelParams params;
  for (Side side : {Side::kUser, Side::kItem}) {
    for (auto& [name, slot] : named_params(params.side(side), side)) *slot = take(name);
  }
  ModelState state;
  state.user_probs = take("state.user_probs");
  state.item_probs = take("state.item_probs");
  state.user_means = take("state.user_means");
  state.item_means = take("state.item_means");
  try {
    ckpt.model = Model::assemble(ckpt.config.model, num_users, num_items, std::move(params),
                                 std::move(state));
  } catch (const DimensionError& e) {
    throw FormatError(std::string("checkpoint tensors: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace dualvae
