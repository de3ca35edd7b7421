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

// Run configuration: one YAML file with a section per module. Every key is
// registered in a single table, which drives parsing (unknown keys are
// rejected), command-line overrides and the verbatim dump of the resolved
// configuration.

#ifndef VOXPROTECT_CONFIG_H_
#define VOXPROTECT_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "voxprotect/attack.h"
#include "voxprotect/features.h"
#include "voxprotect/linmodels.h"
#include "voxprotect/neuralnet.h"
#include "voxprotect/synth.h"

namespace voxprotect {

struct SvmSection {
  SvmOptions options;
  // "all" trains on every slot; "rfe" on the top rfe_top_n slots.
  std::string features = "all";
  int rfe_top_n = 10;
  double ridge_lambda = 1.0;
  std::string ridge_feature = "pitch_mean";
};

struct EvalSection {
  double segment_s = 6.0;
  // Perturbed corpora are cached here (relative to the output directory
  // unless absolute). Empty disables the disk cache.
  std::string cache_dir = "cache";
};

struct PathsSection {
  std::string manifest;
  std::string perturbed;  // perturbed-corpus manifest
  std::string features;   // feature table of the training corpus
  std::string out = "out";
  std::vector<std::string> models;
  std::vector<std::string> ref_models;
  // Further corpora pooled with `manifest` by the adaptations report.
  std::vector<std::string> adaptation_manifests;
};

struct RunConfig {
  std::uint64_t seed = 1;
  PitchConfig pitch;
  CorpusSpec synth;
  M5Config model;
  TrainConfig train;
  PgdConfig pgd;
  SvmSection svm;
  EvalSection eval;
  PathsSection paths;

  // Desk-scale defaults for training (full-size values remain
  // reachable through the config file).
  static RunConfig Defaults();
  // Throws ConfigError naming the section of the first invalid value.
  void Validate() const;
  // Copies the top-level seed into the synth, train and svm seeds.
  void ApplySeed();
};

struct ConfigKey {
  std::string name;  // dotted, e.g. "train.max_lr"
  std::string help;
};

// Every accepted key, in dump order.
const std::vector<ConfigKey>& ConfigKeys();

RunConfig ParseRunConfig(std::string_view yaml, RunConfig base = RunConfig::Defaults());
RunConfig LoadRunConfig(const std::string& path);
// Sets one dotted key from a YAML scalar or flow sequence ("[1, 2]").
void SetConfigValue(RunConfig& cfg, const std::string& key, const std::string& value);
// Resolved configuration as YAML; ParseRunConfig(DumpRunConfig(c)) == c.
std::string DumpRunConfig(const RunConfig& cfg);

}  // namespace voxprotect

#endif  // VOXPROTECT_CONFIG_H_
