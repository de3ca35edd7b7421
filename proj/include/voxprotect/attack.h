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

// Sign-gradient PGD on waveforms against any DifferentiableClassifier.
//
//   x_0 = w
//   x_{i+1} = P(x_i + alpha * sign(grad_x J(x_i, y)))
//
// where P clamps x - w to [-epsilon, epsilon] and then x to [0, 1], and
// sign(0) = 0. Targeted mode descends on the loss of the opposite label.

#ifndef VOXPROTECT_ATTACK_H_
#define VOXPROTECT_ATTACK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "voxprotect/audio_io.h"
#include "voxprotect/neuralnet.h"

namespace voxprotect {

// Tag carried by every perturbed utterance; the reference model id is
// recorded as a second tag "ref=<id>".
inline constexpr char kPerturbedTag[] = "perturbed";
std::string ReferenceTag(const std::string& model_id);

struct PgdConfig {
  double alpha = 0.0005;
  int iterations = 100;
  double epsilon = 0.1;
  double segment_s = 6.0;
  bool targeted = false;  // push towards the opposite gender
  int batch_size = 8;     // utterances attacked together (speed only)

  void Validate() const;
  // Stable short hash of the fields that affect the output.
  std::string Hash() const;
};

struct PerturbationResult {
  Waveform adversarial;
  double delta_linf = 0.0;
  double delta_l2 = 0.0;
  // Loss at x_0 followed by the loss after each iteration (iterations + 1
  // values). Untargeted: cross-entropy of the true label; targeted: of the
  // opposite label.
  std::vector<double> loss_trace;
  std::string reference_model_id;
};

// Called after every projected step with the iteration number (1-based),
// the batch index and the current iterate.
using PgdStepHook = std::function<void(int, std::size_t, std::span<const double>)>;

// Every waveform must already be segment_s long and carry a gender label.
// Throws ShapeError on length mismatch and DataError on a missing label.
std::vector<PerturbationResult> PgdPerturbBatch(const DifferentiableClassifier& ref,
                                                const std::vector<Waveform>& inputs,
                                                const PgdConfig& cfg,
                                                const PgdStepHook& hook = {});
PerturbationResult PgdPerturb(const DifferentiableClassifier& ref, const Waveform& w,
                              const PgdConfig& cfg);

struct SkippedInput {
  std::string source_id;
  std::string reason;
};

struct PerturbedCorpus {
  std::vector<PerturbationResult> results;  // input order, skips removed
  std::vector<SkippedInput> skipped;
  std::string reference_model_id;
  PgdConfig config;

  std::vector<Waveform> Waveforms() const;
};

// Fixes every utterance to segment_s, attacks it and tags the result.
// Failures on individual utterances are collected, not thrown.
PerturbedCorpus PerturbCorpus(const DifferentiableClassifier& ref,
                              const std::vector<Waveform>& corpus, const PgdConfig& cfg);

// Writes <dir>/wavs/*.wav, <dir>/manifest.csv and <dir>/provenance.json
// (reference model id, config, per-utterance norms and skips).
void WritePerturbedCorpus(const std::string& dir, const PerturbedCorpus& pc);

}  // namespace voxprotect

#endif  // VOXPROTECT_ATTACK_H_
