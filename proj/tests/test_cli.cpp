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

// Drives the dualvae binary through a shell and checks exit codes, files and
// printed tables.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(DUALVAE_CLI) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> read_tsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line.front() == '[') continue;  // log lines
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, '\t');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    work_ = fs::temp_directory_path() / "dualvae_cli_test";
    fs::remove_all(work_);
    fs::create_directories(work_);
    const std::string w = work_.string();
    ingest_ = run("--out " + w + "/data ingest --synthetic --users 60 --items 70 --aspects 3 "
                  "--density 0.08 --seed 4");
    train_ = run("--out " + w + "/run --seed 2 --set model.aspects=3 --set model.dim=4 "
                 "--set model.hidden=8 --set train.epochs=3 --set train.batch_size=32 "
                 "train --data " + w + "/data");
  }
  static std::string w() { return work_.string(); }
  static std::string ckpt() { return w() + "/run/checkpoint.bin"; }

  static inline fs::path work_;
  static inline CliRun ingest_, train_;
};

TEST_F(Cli, IngestAndTrainWriteTheirArtifacts) {
  ASSERT_EQ(ingest_.code, 0) << ingest_.output;
  ASSERT_EQ(train_.code, 0) << train_.output;
  for (const char* f : {"users.tsv", "items.tsv", "train.tsv", "valid.tsv", "test.tsv",
                        "planted.tsv"})
    EXPECT_TRUE(fs::exists(work_ / "data" / f)) << f;
  for (const char* f : {"checkpoint.bin", "config.ini", "train_log.tsv", "metrics_valid.tsv"})
    EXPECT_TRUE(fs::exists(work_ / "run" / f)) << f;
  auto log = read_tsv(slurp(work_ / "run" / "train_log.tsv"));
  ASSERT_EQ(log.size(), 1u + 2 * 3);
  EXPECT_EQ(log[0], (std::vector<std::string>{"epoch", "phase", "loss", "recon", "kl",
                                              "contrast", "val_r20"}));
}

TEST_F(Cli, MissingDataNamesTheFile) {
  CliRun r = run("--out " + w() + "/none train --data " + w() + "/does_not_exist");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("does_not_exist"), std::string::npos) << r.output;

  fs::copy(work_ / "data", work_ / "partial");
  fs::remove(work_ / "partial" / "train.tsv");
  CliRun partial = run("--out " + w() + "/none train --data " + w() + "/partial");
  EXPECT_EQ(partial.code, 2);
  EXPECT_NE(partial.output.find("train.tsv"), std::string::npos) << partial.output;
}

TEST_F(Cli, NoNrcAblationZeroesTheContrastColumn) {
  CliRun r = run("--out " + w() + "/abl --ablate no_nrc --set model.aspects=3 --set model.dim=4 "
              "--set model.hidden=8 --set train.epochs=2 ablate --data " + w() + "/data");
  ASSERT_EQ(r.code, 0) << r.output;
  auto log = read_tsv(slurp(work_ / "abl" / "train_log.tsv"));
  ASSERT_GT(log.size(), 1u);
  for (std::size_t k = 1; k < log.size(); ++k) EXPECT_EQ(std::stod(log[k][5]), 0.0);
  auto full = read_tsv(slurp(work_ / "run" / "train_log.tsv"));
  EXPECT_GT(std::stod(full[1][5]), 0.0);
}

TEST_F(Cli, EvaluateWritesMetricTable) {
  CliRun r = run("--out " + w() + "/run evaluate --checkpoint " + ckpt() + " --data " + w() +
              "/data --split test");
  ASSERT_EQ(r.code, 0) << r.output;
  auto rows = read_tsv(slurp(work_ / "run" / "metrics_test.tsv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"metric", "N", "value", "n_users"}));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double v = std::stod(rows[k][2]);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST_F(Cli, CheckpointFromOtherDataIsRejected) {
  ASSERT_EQ(run("--out " + w() + "/other ingest --synthetic --users 61 --items 70 --aspects 3 "
                "--density 0.08").code, 0);
  CliRun r = run("evaluate --checkpoint " + ckpt() + " --data " + w() + "/other");
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("id map"), std::string::npos) << r.output;
}

TEST_F(Cli, RecommendAddendsSumToScore) {
  CliRun r = run("recommend --checkpoint " + ckpt() + " --data " + w() + "/data --user 5 -n 4");
  ASSERT_EQ(r.code, 0) << r.output;
  auto rows = read_tsv(r.output);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].size(), 4u + 3);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    double total = 0;
    for (std::size_t c = 4; c < rows[k].size(); ++c) total += std::stod(rows[k][c]);
    EXPECT_NEAR(total, std::stod(rows[k][3]), 1e-9);
    EXPECT_EQ(rows[k][1], std::to_string(k));
  }
}

TEST_F(Cli, ExportAspectsWritesSimplexRows) {
  CliRun r = run("--out " + w() + "/run export-aspects --checkpoint " + ckpt() + " --data " + w() +
              "/data");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("item_recovery"), std::string::npos);
  auto rows = read_tsv(slurp(work_ / "run" / "aspects_item.tsv"));
  ASSERT_EQ(rows.size(), 71u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    double total = 0;
    for (std::size_t c = 1; c < rows[k].size(); ++c) total += std::stod(rows[k][c]);
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST_F(Cli, GradcheckExitCodes) {
  EXPECT_EQ(run("gradcheck").code, 0);
  CliRun flipped = run("gradcheck --flip-group encoder_u");
  EXPECT_EQ(flipped.code, 3) << flipped.output;
}

TEST_F(Cli, UnknownConfigKeyIsAUsageError) {
  CliRun r = run("--set model.nope=1 train --data " + w() + "/data");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("model.nope"), std::string::npos) << r.output;
}

}  // namespace
