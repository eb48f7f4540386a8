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

#include "dualvae/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "dualvae/errors.hpp"

namespace dualvae {

namespace {

using Getter = std::function<std::string(const RunConfig&)>;
using Setter = std::function<void(RunConfig&, const std::string&)>;

struct Entry {
  ConfigKeyInfo info;
  Getter get;
  Setter set;
};

std::string fmt_double(double v) { return fmt::format("{}", v); }

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, s));
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, s));
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, s));
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
Entry make_uint(std::string key, std::string desc, bool train, std::function<T&(RunConfig&)> ref) {
  return {{key, std::move(desc), train},
          [ref](const RunConfig& c) {
            return std::to_string(ref(const_cast<RunConfig&>(c)));
          },
          [ref, key](RunConfig& c, const std::string& v) {
            ref(c) = static_cast<T>(parse_uint(key, v));
          }};
}

Entry make_bool(std::string key, std::string desc, bool train, std::function<bool&(RunConfig&)> ref) {
  return {{key, std::move(desc), train},
          [ref](const RunConfig& c) {
            return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [ref, key](RunConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); }};
}

Entry make_dbl(std::string key, std::string desc, bool train,
               std::function<double&(RunConfig&)> ref) {
  return {{key, std::move(desc), train},
          [ref](const RunConfig& c) { return fmt_double(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, const std::string& v) { ref(c) = parse_double(key, v); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({{"data.dir", "prepared data directory written by `ingest`", false},
                 [](const RunConfig& c) { return c.data_dir.string(); },
                 [](RunConfig& c, const std::string& v) { c.data_dir = v; }});
    t.push_back(make_dbl("data.train_ratio", "per-user share of interactions kept for training",
                         false, [](RunConfig& c) -> double& { return c.train_ratio; }));
    t.push_back(make_dbl("data.valid_fraction",
                         "share of held-out interactions moved to validation", false,
                         [](RunConfig& c) -> double& { return c.valid_fraction; }));
    t.push_back(make_uint<std::size_t>("data.min_user_core", "k-core threshold for users", false,
                                       [](RunConfig& c) -> std::size_t& { return c.min_user_core; }));
    t.push_back(make_uint<std::size_t>("data.min_item_core", "k-core threshold for items", false,
                                       [](RunConfig& c) -> std::size_t& { return c.min_item_core; }));
    t.push_back({{"data.output", "output directory for checkpoints, logs and reports", false},
                 [](const RunConfig& c) { return c.output_dir.string(); },
                 [](RunConfig& c, const std::string& v) { c.output_dir = v; }});

    t.push_back(make_uint<std::size_t>("model.aspects", "number of aspects A", true,
                                       [](RunConfig& c) -> std::size_t& { return c.train.model.aspects; }));
    t.push_back(make_uint<std::size_t>("model.dim", "latent size per aspect d", true,
                                       [](RunConfig& c) -> std::size_t& { return c.train.model.dim; }));
    t.push_back(make_uint<std::size_t>("model.hidden", "encoder hidden width", true,
                                       [](RunConfig& c) -> std::size_t& { return c.train.model.hidden; }));
    t.push_back(make_dbl("model.temp", "aspect attention softmax temperature", true,
                         [](RunConfig& c) -> double& { return c.train.model.temp; }));
    t.push_back(make_dbl("model.beta", "KL weight", true,
                         [](RunConfig& c) -> double& { return c.train.model.beta; }));
    t.push_back(make_dbl("model.logvar_clamp", "symmetric clamp on encoder log-variance", true,
                         [](RunConfig& c) -> double& { return c.train.model.logvar_clamp; }));
    t.push_back({{"model.ablate",
                  "comma-separated ablations: no_add,no_ud,no_id,no_nrc,no_uns,no_ans,no_nps",
                  true},
                 [](const RunConfig& c) { return format_ablation(c.train.model.ablation); },
                 [](RunConfig& c, const std::string& v) {
                   c.train.model.ablation = parse_ablation(v);
                 }});

    t.push_back(make_dbl("contrast.tau", "InfoNCE temperature", true,
                         [](RunConfig& c) -> double& { return c.train.model.tau; }));
    t.push_back(make_dbl("contrast.gamma", "weight of the contrastive term", true,
                         [](RunConfig& c) -> double& { return c.train.model.gamma; }));

    t.push_back(make_dbl("train.lr", "Adam learning rate", true,
                         [](RunConfig& c) -> double& { return c.train.lr; }));
    t.push_back(make_uint<std::size_t>("train.batch_size", "minibatch size", true,
                                       [](RunConfig& c) -> std::size_t& { return c.train.batch_size; }));
    t.push_back(make_uint<std::size_t>("train.epochs", "maximum number of epoch pairs", true,
                                       [](RunConfig& c) -> std::size_t& { return c.train.epochs; }));
    t.push_back(make_uint<std::size_t>("train.patience",
                                       "epochs without validation improvement before stopping",
                                       true, [](RunConfig& c) -> std::size_t& { return c.train.patience; }));
    t.push_back(make_uint<std::size_t>("train.beta_anneal_epochs",
                                       "linear KL warm-up length in epochs, 0 for none", true,
                                       [](RunConfig& c) -> std::size_t& {
                                         return c.train.beta_anneal_epochs;
                                       }));
    t.push_back(make_uint<std::uint64_t>("train.seed", "random seed", true,
                                         [](RunConfig& c) -> std::uint64_t& { return c.train.seed; }));
    t.push_back(make_bool("train.deterministic", "single-threaded bitwise-reproducible run", true,
                          [](RunConfig& c) -> bool& { return c.train.deterministic; }));
    t.push_back({{"train.precision", "parameter storage precision: f64 or f32", true},
                 [](const RunConfig& c) {
                   return std::string(c.train.precision == Precision::kF32 ? "f32" : "f64");
                 },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "f64") c.train.precision = Precision::kF64;
                   else if (v == "f32") c.train.precision = Precision::kF32;
                   else throw ConfigError("train.precision: expected f64 or f32, got '" + v + "'");
                 }});

    t.push_back({{"eval.cutoffs", "comma-separated ranking cutoffs N", false},
                 [](const RunConfig& c) {
                   std::string out;
                   for (std::size_t n : c.cutoffs) out += (out.empty() ? "" : ",") + std::to_string(n);
                   return out;
                 },
                 [](RunConfig& c, const std::string& v) {
                   std::vector<std::size_t> cuts;
                   std::stringstream in(v);
                   std::string tok;
                   while (std::getline(in, tok, ',')) {
                     tok = trim(tok);
                     if (tok.empty()) continue;
                     const auto n = parse_uint("eval.cutoffs", tok);
                     if (n == 0) throw ConfigError("eval.cutoffs: cutoffs must be positive");
                     cuts.push_back(static_cast<std::size_t>(n));
                   }
                   if (cuts.empty()) throw ConfigError("eval.cutoffs: at least one cutoff needed");
                   c.cutoffs = std::move(cuts);
                 }});
    return t;
  }();
  return table;
}

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.info.key == key) return e;
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (batch_size == 0) throw ConfigError("train.batch_size must be at least 1");
}

const std::vector<ConfigKeyInfo>& config_keys() {
  static const std::vector<ConfigKeyInfo> keys = [] {
    std::vector<ConfigKeyInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return keys;
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) {
  return find_entry(key).get(cfg);
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  find_entry(key).set(cfg, trim(value));
}

RunConfig parse_run_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(fmt::format("config key '{}' must be inside a section", section));
    }
    for (const auto& [name, leaf] : body) {
      set_config_value(cfg, section + "." + name, leaf.data());
    }
  }
  cfg.train.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& e : entries()) {
    const auto dot = e.info.key.find('.');
    const std::string s = e.info.key.substr(0, dot);
    if (s != section) {
      out += (section.empty() ? "" : "\n") + fmt::format("[{}]\n", s);
      section = s;
    }
    out += fmt::format("; {}\n{} = {}\n", e.info.description, e.info.key.substr(dot + 1),
                       e.get(cfg));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> train_config_entries(const TrainConfig& cfg) {
  RunConfig run;
  run.train = cfg;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries()) {
    if (e.info.train_key) out.emplace_back(e.info.key, e.get(run));
  }
  return out;
}

TrainConfig train_config_from_entries(
    const std::vector<std::pair<std::string, std::string>>& kv) {
  RunConfig run;
  for (const auto& [key, value] : kv) {
    const Entry& e = find_entry(key);
    if (!e.info.train_key) throw ConfigError(fmt::format("'{}' is not a training key", key));
    e.set(run, value);
  }
  return run.train;
}

}  // namespace dualvae
