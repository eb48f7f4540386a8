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

// dualvae: command-line front end.
//
//   dualvae ingest --input ratings.dat --out data/
//   dualvae ingest --synthetic --users 400 --items 400 --out data/
//   dualvae train --data data/ --out run/ --seed 7 --deterministic
//   dualvae evaluate --checkpoint run/checkpoint.bin --data data/
//   dualvae recommend --checkpoint run/checkpoint.bin --data data/ --user 12 -n 10
//   dualvae gradcheck

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "data_dir.hpp"
#include "dualvae/checkpoint.hpp"
#include "dualvae/config.hpp"
#include "dualvae/errors.hpp"
#include "dualvae/eval.hpp"
#include "dualvae/gradcheck.hpp"
#include "dualvae/hash.hpp"
#include "dualvae/synth.hpp"
#include "dualvae/trainer.hpp"

namespace fs = std::filesystem;
using namespace dualvae;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::optional<std::string> ablate;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
  bool verbose = false;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.train.seed = *g.seed;
  if (g.deterministic) cfg.train.deterministic = true;
  if (g.ablate) cfg.train.model.ablation = parse_ablation(*g.ablate);
  if (g.out) cfg.output_dir = *g.out;
  cfg.train.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void check_fingerprint(const Checkpoint& ckpt, const cli::DataDir& data) {
  const std::string fp = id_map_fingerprint(data.users, data.items);
  if (ckpt.data_fingerprint != fp) {
    throw DataError("checkpoint and data directory have different id maps");
  }
}

// --- ingest -----------------------------------------------------------------

struct IngestArgs {
  std::string input;
  bool synthetic = false;
  std::size_t users = 400;
  std::size_t items = 400;
  std::size_t aspects = 4;
  double density = 0.01;
  std::string mixture = "onehot";
};

int cmd_ingest(const Globals& g, const IngestArgs& a) {
  RunConfig cfg = resolve_config(g);
  const fs::path out = cfg.output_dir;
  IdMap users, items;
  InteractionMatrix matrix;
  std::optional<PlantedWorld> world;
  if (a.synthetic) {
    const auto kind = a.mixture == "dirichlet" ? MixtureKind::kDirichlet : MixtureKind::kOneHot;
    if (a.mixture != "onehot" && a.mixture != "dirichlet") {
      throw ConfigError("--mixture must be onehot or dirichlet");
    }
    SynthData s = generate(a.users, a.items, a.aspects, a.density, cfg.train.seed, kind);
    for (std::size_t u = 0; u < a.users; ++u) users.ids.push_back(std::to_string(u));
    for (std::size_t i = 0; i < a.items; ++i) items.ids.push_back(std::to_string(i));
    matrix = std::move(s.matrix);
    world = std::move(s.world);
  } else {
    if (a.input.empty()) throw ConfigError("ingest needs --input FILE or --synthetic");
    IngestOptions opts;
    opts.min_user_core = cfg.min_user_core;
    opts.min_item_core = cfg.min_item_core;
    Dataset d = ingest(a.input, opts);
    users = std::move(d.users);
    items = std::move(d.items);
    matrix = std::move(d.matrix);
  }
  DatasetSplit split = dualvae::split(matrix, cfg.train_ratio, cfg.valid_fraction, cfg.train.seed);
  cli::write_data_dir(out, users, items, split, world ? &*world : nullptr);
  fmt::print("users\t{}\nitems\t{}\ntrain\t{}\nvalid\t{}\ntest\t{}\n", users.size(), items.size(),
             split.train.nnz(), split.valid.nnz(), split.test.nnz());
  return kOk;
}

// --- train ------------------------------------------------------------------

struct RunOutcome {
  Checkpoint best;
  std::size_t epochs = 0;
};

RunOutcome train_into(const RunConfig& cfg, const cli::DataDir& data, const fs::path& out) {
  fs::create_directories(out);
  {
    auto conf = open_out(out / "config.ini");
    conf << serialize_run_config(cfg);
  }
  auto log = open_out(out / "train_log.tsv");
  write_log_header(log);
  FitOptions opts;
  opts.data_fingerprint = id_map_fingerprint(data.users, data.items);
  opts.on_epoch = [&](const EpochStats& s) {
    write_log_rows(log, s);
    log.flush();
    spdlog::info("epoch {}: user loss {:.4f}, item loss {:.4f}, val R@20 {:.4f}", s.epoch,
                 s.user.loss, s.item.loss, s.val_recall);
  };
  FitResult fit_result = fit(data.split, cfg.train, opts);
  save_checkpoint(out / "checkpoint.bin", fit_result.best);

  EvalOptions eo;
  eo.cutoffs = cfg.cutoffs;
  eo.masks = {&data.split.train};
  auto res = evaluate(fit_result.best.model, data.split.valid, eo);
  write_metrics_tsv(out / "metrics_valid.tsv", res.rows);
  return {std::move(fit_result.best), fit_result.history.size()};
}

int cmd_train(const Globals& g, const std::string& data_dir) {
  RunConfig cfg = resolve_config(g);
  if (!data_dir.empty()) cfg.data_dir = data_dir;
  if (cfg.data_dir.empty()) throw ConfigError("no data directory (use --data or data.dir)");
  cli::DataDir data = cli::read_data_dir(cfg.data_dir);
  RunOutcome r = train_into(cfg, data, cfg.output_dir);
  fmt::print("epochs\t{}\nbest_epoch\t{}\nbest_val_r20\t{}\ncheckpoint\t{}\n", r.epochs,
             r.best.epoch, r.best.best_metric, (cfg.output_dir / "checkpoint.bin").string());
  return kOk;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const Globals& g, const std::string& data_dir, const std::vector<std::string>& grid) {
  RunConfig base = resolve_config(g);
  if (!data_dir.empty()) base.data_dir = data_dir;
  if (base.data_dir.empty()) throw ConfigError("no data directory (use --data or data.dir)");
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& spec : grid) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--grid expects key=v1,v2,..., got '" + spec + "'");
    std::vector<std::string> values;
    std::stringstream in(spec.substr(eq + 1));
    for (std::string v; std::getline(in, v, ',');) values.push_back(v);
    if (values.empty()) throw ConfigError("--grid axis '" + spec + "' has no values");
    axes.emplace_back(spec.substr(0, eq), std::move(values));
  }
  cli::DataDir data = cli::read_data_dir(base.data_dir);
  fs::create_directories(base.output_dir);
  auto summary = open_out(base.output_dir / "sweep.tsv");
  summary << "run";
  for (const auto& [key, values] : axes) summary << '\t' << key;
  summary << "\tbest_val_r20\tbest_epoch\tepochs\n";

  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t run = 0;; ++run) {
    RunConfig cfg = base;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      set_config_value(cfg, axes[k].first, axes[k].second[idx[k]]);
    }
    cfg.train.validate();
    const fs::path out = base.output_dir / fmt::format("run_{:03d}", run);
    RunOutcome r = train_into(cfg, data, out);
    summary << run;
    for (std::size_t k = 0; k < axes.size(); ++k) summary << '\t' << axes[k].second[idx[k]];
    summary << fmt::format("\t{}\t{}\t{}\n", r.best.best_metric, r.best.epoch, r.epochs);
    summary.flush();
    std::size_t k = 0;
    while (k < axes.size() && ++idx[k] == axes[k].second.size()) idx[k++] = 0;
    if (k == axes.size()) break;
  }
  fmt::print("{}", (base.output_dir / "sweep.tsv").string() + "\n");
  return kOk;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const Globals& g, const std::string& ckpt_path, const std::string& data_dir,
                 const std::string& split_name, bool no_mask) {
  RunConfig cfg = resolve_config(g);
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  cli::DataDir data = cli::read_data_dir(data_dir.empty() ? cfg.data_dir : fs::path(data_dir));
  check_fingerprint(ckpt, data);
  EvalOptions eo;
  eo.cutoffs = cfg.cutoffs;
  const InteractionMatrix* target = nullptr;
  if (split_name == "test") {
    target = &data.split.test;
    eo.masks = {&data.split.train, &data.split.valid};
  } else if (split_name == "valid") {
    target = &data.split.valid;
    eo.masks = {&data.split.train};
  } else if (split_name == "train") {
    target = &data.split.train;
  } else {
    throw ConfigError("--split must be train, valid or test");
  }
  if (no_mask) eo.masks.clear();
  auto res = evaluate(ckpt.model, *target, eo);
  const std::string tsv = format_metrics_tsv(res.rows);
  fmt::print("{}", tsv);
  fs::create_directories(cfg.output_dir);
  auto out = open_out(cfg.output_dir / fmt::format("metrics_{}.tsv", split_name));
  out << tsv;
  return kOk;
}

// --- recommend --------------------------------------------------------------

int cmd_recommend(const Globals& g, const std::string& ckpt_path, const std::string& data_dir,
                  const std::vector<std::string>& user_ids, std::size_t n) {
  RunConfig cfg = resolve_config(g);
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  cli::DataDir data = cli::read_data_dir(data_dir.empty() ? cfg.data_dir : fs::path(data_dir));
  check_fingerprint(ckpt, data);
  const std::size_t aspects = ckpt.model.config().aspects;
  std::string header = "user\trank\titem\tscore";
  for (std::size_t a = 0; a < aspects; ++a) header += fmt::format("\taspect_{}", a + 1);
  fmt::print("{}\n", header);
  for (const auto& id : user_ids) {
    const auto u = data.users.find(id);
    if (u < 0) throw DataError("unknown user id '" + id + "'");
    const Index user = static_cast<Index>(u);
    Tensor scores = ckpt.model.score_users(std::span<const Index>(&user, 1));
    const InteractionMatrix* masks[] = {&data.split.train};
    mask_scores(scores, std::span<const Index>(&user, 1), masks);
    const auto top = top_n(scores.row_span(0), n);
    for (std::size_t r = 0; r < top.size(); ++r) {
      ScoreBreakdown b = ckpt.model.explain(user, top[r]);
      std::string line = fmt::format("{}\t{}\t{}\t{}", id, r + 1, data.items.ids[top[r]], b.score);
      for (double v : b.addends) line += fmt::format("\t{}", v);
      fmt::print("{}\n", line);
    }
  }
  return kOk;
}

// --- export-aspects ---------------------------------------------------------

void write_aspects(const fs::path& path, const IdMap& ids, const Tensor& probs) {
  auto out = open_out(path);
  out << "entity_id";
  for (std::size_t a = 0; a < probs.cols(); ++a) out << "\tp_" << a + 1;
  out << '\n';
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    out << ids.ids[r];
    for (double v : probs.row_span(r)) out << '\t' << fmt::format("{}", v);
    out << '\n';
  }
}

int cmd_export(const Globals& g, const std::string& ckpt_path, const std::string& data_dir) {
  RunConfig cfg = resolve_config(g);
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  cli::DataDir data = cli::read_data_dir(data_dir.empty() ? cfg.data_dir : fs::path(data_dir));
  check_fingerprint(ckpt, data);
  fs::create_directories(cfg.output_dir);
  write_aspects(cfg.output_dir / "aspects_user.tsv", data.users, ckpt.model.state().user_probs);
  write_aspects(cfg.output_dir / "aspects_item.tsv", data.items, ckpt.model.state().item_probs);
  if (!data.planted_items.empty()) {
    const auto report = aspect_entropy_report(ckpt.model.state().item_probs);
    const std::size_t labels = std::max(ckpt.model.config().aspects,
                                        *std::max_element(data.planted_items.begin(),
                                                          data.planted_items.end()) + 1);
    fmt::print("item_recovery\t{}\n",
               aspect_recovery_score(report.argmax, data.planted_items, labels));
  }
  fmt::print("{}\n{}\n", (cfg.output_dir / "aspects_user.tsv").string(),
             (cfg.output_dir / "aspects_item.tsv").string());
  return kOk;
}

// --- gradcheck --------------------------------------------------------------

int cmd_gradcheck(const Globals& g, const std::string& flip_group) {
  GradcheckOptions opts;
  opts.seed = g.seed.value_or(0);
  opts.flip_group = flip_group;
  GradcheckReport report = run_gradcheck(opts);
  fmt::print("group\tcoordinates\tmax_rel_err\tmax_abs_err\tstatus\n");
  for (const auto& r : report.groups) {
    fmt::print("{}\t{}\t{:.3e}\t{:.3e}\t{}\n", r.group, r.coordinates, r.max_rel_err, r.max_abs_err,
               r.pass ? "PASS" : "FAIL");
  }
  return report.pass ? kOk : kNumeric;
}

std::string config_help() {
  std::string out = "Config keys ([section] name = value):\n";
  for (const auto& k : config_keys()) {
    out += fmt::format("  {:<26} {} (default: {})\n", k.key, k.description,
                       get_config_value(RunConfig{}, k.key));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual disentangled VAE recommender"};
  app.footer(config_help());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed (overrides train.seed)");
  app.add_flag("--deterministic", g.deterministic, "bitwise-reproducible single-threaded run");
  app.add_option("--ablate", g.ablate, "comma-separated ablation flags");
  app.add_option("--out", g.out, "output directory (overrides data.output)");
  app.add_option("--set", g.overrides, "override a config key, key=value (repeatable)");
  app.add_flag("-v,--verbose", g.verbose, "debug logging");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "read interactions, filter, split, write a data dir");
  ingest_cmd->add_option("--input", ingest_args.input, "interaction file (user item ...)");
  ingest_cmd->add_flag("--synthetic", ingest_args.synthetic, "generate a planted-aspect world");
  ingest_cmd->add_option("--users", ingest_args.users, "synthetic user count");
  ingest_cmd->add_option("--items", ingest_args.items, "synthetic item count");
  ingest_cmd->add_option("--aspects", ingest_args.aspects, "synthetic planted aspects");
  ingest_cmd->add_option("--density", ingest_args.density, "synthetic interaction density");
  ingest_cmd->add_option("--mixture", ingest_args.mixture, "onehot or dirichlet");

  std::string data_dir, ckpt_path, split_name = "test", flip_group;
  bool no_mask = false;
  std::vector<std::string> user_ids, grid;
  std::size_t top = 20;

  auto* train_cmd = app.add_subcommand("train", "fit a model and write the best checkpoint");
  train_cmd->add_option("--data", data_dir, "data directory");
  auto* ablate_cmd = app.add_subcommand("ablate", "alias of train, used with --ablate");
  ablate_cmd->add_option("--data", data_dir, "data directory");
  auto* sweep_cmd = app.add_subcommand("sweep", "train over a grid of config values");
  sweep_cmd->add_option("--data", data_dir, "data directory");
  sweep_cmd->add_option("--grid", grid, "key=v1,v2,... (repeatable)")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "ranking metrics of a checkpoint");
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--data", data_dir, "data directory");
  eval_cmd->add_option("--split", split_name, "train, valid or test");
  eval_cmd->add_flag("--no-mask", no_mask, "do not exclude known interactions from ranking");

  auto* rec_cmd = app.add_subcommand("recommend", "top-N items with per-aspect score addends");
  rec_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  rec_cmd->add_option("--data", data_dir, "data directory");
  rec_cmd->add_option("--user", user_ids, "original user id (repeatable)")->required();
  rec_cmd->add_option("-n", top, "list length");

  auto* export_cmd = app.add_subcommand("export-aspects", "write C and P as TSV");
  export_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  export_cmd->add_option("--data", data_dir, "data directory");

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  grad_cmd->add_option("--flip-group", flip_group, "negate one group's analytic gradient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  auto logger = spdlog::stderr_color_mt("dualvae");
  spdlog::set_default_logger(logger);
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*ingest_cmd) return cmd_ingest(g, ingest_args);
    if (*train_cmd || *ablate_cmd) return cmd_train(g, data_dir);
    if (*sweep_cmd) return cmd_sweep(g, data_dir, grid);
    if (*eval_cmd) return cmd_evaluate(g, ckpt_path, data_dir, split_name, no_mask);
    if (*rec_cmd) return cmd_recommend(g, ckpt_path, data_dir, user_ids, top);
    if (*export_cmd) return cmd_export(g, ckpt_path, data_dir);
    if (*grad_cmd) return cmd_gradcheck(g, flip_group);
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return kData;
  } catch (const FormatError& e) {
    spdlog::error("{}", e.what());
    return kData;
  } catch (const NumericError& e) {
    spdlog::error("{}", e.what());
    return kNumeric;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
  return kUsage;
}
