// Copyright 2026 The voxprotect Authors
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

// Drives the voxprotect binary through a shell and checks exit codes and
// the files it leaves behind.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.h"

namespace {

namespace fs = std::filesystem;

int Cli(const std::string& args) {
  const std::string cmd = std::string(VOXPROTECT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Binary, UsageErrorsExitTwo) {
  EXPECT_EQ(Cli("--help"), 0);
  EXPECT_EQ(Cli(""), 2);
  EXPECT_EQ(Cli("frobnicate"), 2);
  EXPECT_EQ(Cli("synth --no-such-flag"), 2);
}

TEST(Binary, ConfigProblemsExitTwo) {
  const fs::path dir = voxprotect::testing::ScratchDir("cli_cfg");
  EXPECT_EQ(Cli("synth --out " + dir.string() + " --set train.max_lrr=1"), 2);
  EXPECT_EQ(Cli("synth --out " + dir.string() + " --set pgd.alpha=0"), 2);
  EXPECT_EQ(Cli("synth --out " + dir.string() + " --config /nonexistent.yaml"), 2);
  std::ofstream(dir / "bad.yaml") << "pgd:\n  epsilon: lots\n";
  EXPECT_EQ(Cli("synth --out " + dir.string() + " --config " + (dir / "bad.yaml").string()), 2);
}

TEST(Binary, MissingDataExitsThree) {
  const fs::path dir = voxprotect::testing::ScratchDir("cli_data");
  EXPECT_EQ(Cli("extract --manifest /nonexistent/manifest.csv --out " + dir.string()), 3);
  std::ofstream(dir / "junk.ckpt") << "not a checkpoint";
  std::ofstream(dir / "manifest.csv") << "path,speaker_id,gender,tags\n";
  EXPECT_EQ(Cli("evaluate --manifest " + (dir / "manifest.csv").string() + " --model " +
                (dir / "junk.ckpt").string() + " --out " + dir.string()),
            3);
}

TEST(Binary, SmallFeaturePipeline) {
  const fs::path dir = voxprotect::testing::ScratchDir("cli_run");
  const std::string d = dir.string();
  const std::string small = " --set synth.n_per_gender=4 --set synth.duration_s=1";
  ASSERT_EQ(Cli("synth --out " + d + "/corpus --seed 3" + small), 0);
  ASSERT_TRUE(fs::exists(dir / "corpus/manifest.csv"));
  ASSERT_TRUE(fs::exists(dir / "corpus/resolved_config.yaml"));
  EXPECT_NE(Slurp(dir / "corpus/resolved_config.yaml").find("n_per_gender: 4"),
            std::string::npos);
  ASSERT_EQ(Cli("extract --manifest " + d + "/corpus/manifest.csv --out " + d + "/feat"), 0);
  ASSERT_TRUE(fs::exists(dir / "feat/features.csv"));
  ASSERT_EQ(Cli("train-ridge --features " + d + "/feat/features.csv --out " + d + "/ridge"), 0);
  ASSERT_EQ(Cli("train-svm --features " + d + "/feat/features.csv --out " + d + "/svm"), 0);
  ASSERT_EQ(Cli("evaluate --manifest " + d + "/corpus/manifest.csv --model " + d +
                "/ridge/ridge.json --model " + d + "/svm/svm.json --out " + d + "/eval" +
                " --set eval.segment_s=1"),
            0);
  const std::string report = Slurp(dir / "eval/evaluate.txt");
  EXPECT_NE(report.find("ridge-"), std::string::npos);
  EXPECT_NE(report.find("svm-"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "eval/evaluate.tsv"));
  // An attack needs exactly one CNN reference.
  EXPECT_EQ(Cli("attack --manifest " + d + "/corpus/manifest.csv --out " + d + "/p"), 2);
}

}  // namespace
