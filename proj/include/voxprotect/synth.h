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

// Synthetic voiced signals with known pitch, jitter, shimmer, noise level
// and formants. These serve as oracles for the feature extractors and as
// gender-separable corpora for the classifier and attack stages.

#ifndef VOXPROTECT_SYNTH_H_
#define VOXPROTECT_SYNTH_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "voxprotect/audio_io.h"

namespace voxprotect {

enum class PulseShape { kImpulse, kRosenberg };

struct SynthSpec {
  double f0_hz = 120.0;
  double duration_s = 1.0;
  double jitter_frac = 0.0;
  double shimmer_frac = 0.0;
  double noise_rms_frac = 0.0;
  std::array<double, 3> formants_hz = {500.0, 1500.0, 2500.0};
  std::array<double, 3> formant_bw_hz = {80.0, 90.0, 120.0};
  PulseShape pulse_shape = PulseShape::kRosenberg;

  // Throws ConfigError when a field is out of range.
  void Validate() const;
};

// Generator ground truth alongside the rendered waveform.
struct SynthResult {
  Waveform wave;
  std::vector<double> pulse_times_s;
  std::vector<double> pulse_amplitudes;
  // RMS of the (mean-removed) voiced part and of the added noise, both in
  // the pre-normalization domain.
  double voiced_rms = 0.0;
  double noise_rms = 0.0;
};

SynthResult SynthVoiceWithTruth(const SynthSpec& spec, std::mt19937_64& rng);
Waveform SynthVoice(const SynthSpec& spec, std::mt19937_64& rng);

// Sum of pure tones (Hz, relative amplitude) normalized to [0, 1].
Waveform SynthTones(const std::vector<std::pair<double, double>>& tones,
                    double duration_s);
// Gaussian white noise normalized to [0, 1].
Waveform SynthWhiteNoise(double duration_s, std::mt19937_64& rng);

struct Distribution {
  double mean = 0.0;
  double std = 0.0;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Corpus parameters. The default distributions are configuration choices
// for a learnable but overlapping two-class problem; they are not measured
// speech statistics.
struct CorpusSpec {
  int n_per_gender = 50;
  Distribution f0_f = {210.0, 30.0};
  Distribution f0_m = {120.0, 25.0};
  Range jitter = {0.002, 0.012};
  Range shimmer = {0.01, 0.05};
  Range noise = {0.02, 0.15};
  std::array<double, 3> formants_f_hz = {610.0, 1750.0, 2900.0};
  std::array<double, 3> formants_m_hz = {520.0, 1500.0, 2500.0};
  std::array<double, 3> formant_bw_hz = {80.0, 90.0, 120.0};
  // Per-utterance multiplicative formant spread (uniform +/- this fraction).
  double formant_spread = 0.05;
  double duration_s = 6.0;
  PulseShape pulse_shape = PulseShape::kRosenberg;
  // Voice-adaptation proxy applied to every utterance ("default",
  // "overlyhappy", "lowrobot", "highrobot"). Stored as an adaptation tag.
  std::string adaptation = "default";
  std::string id_prefix;
  std::uint64_t seed = 1;

  void Validate() const;
};

struct Corpus {
  std::vector<Waveform> waves;
  Manifest manifest;
};

// 2 * n_per_gender utterances, females first. Source ids are
// "<prefix>f0001", "<prefix>m0001", ...; manifest paths are wavs/<id>.wav.
Corpus MakeCorpus(const CorpusSpec& spec);

// Tag carried by every utterance produced under an adaptation proxy.
std::string AdaptationTag(const std::string& adaptation);

}  // namespace voxprotect

#endif  // VOXPROTECT_SYNTH_H_
