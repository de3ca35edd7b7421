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

#include "voxprotect/synth.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.h"
#include "voxprotect/error.h"
#include "voxprotect/features.h"

namespace voxprotect {
namespace {

using testing::ForAll;
using testing::Gen;

CorpusSpec Small(int n = 3) {
  CorpusSpec s;
  s.n_per_gender = n;
  s.duration_s = 0.5;
  return s;
}

TEST(SynthVoice, PropertyUnitRangeExactLengthAndPulseSpacing) {
  ForAll(15, 1000, [](Gen& g) {
    SynthSpec s;
    s.f0_hz = g.Uniform(70.0, 400.0);
    s.duration_s = g.Uniform(0.05, 0.5);
    s.jitter_frac = g.Coin() ? 0.0 : g.Uniform(0.0, 0.03);
    s.shimmer_frac = g.Uniform(0.0, 0.1);
    s.noise_rms_frac = g.Uniform(0.0, 0.3);
    s.pulse_shape = g.Coin() ? PulseShape::kImpulse : PulseShape::kRosenberg;
    const SynthResult r = SynthVoiceWithTruth(s, g.rng());
    const auto& x = r.wave.samples;
    ASSERT_EQ(x.size(), static_cast<std::size_t>(std::llround(s.duration_s * kSampleRateHz)));
    EXPECT_DOUBLE_EQ(*std::min_element(x.begin(), x.end()), 0.0);
    EXPECT_DOUBLE_EQ(*std::max_element(x.begin(), x.end()), 1.0);
    ASSERT_EQ(r.pulse_times_s.size(), r.pulse_amplitudes.size());
    const double t0 = 1.0 / s.f0_hz;
    for (std::size_t i = 1; i < r.pulse_times_s.size(); ++i) {
      const double p = r.pulse_times_s[i] - r.pulse_times_s[i - 1];
      // Period draws are clamped to +/-45 %.
      EXPECT_GE(p, 0.55 * t0 - 1e-12);
      EXPECT_LE(p, 1.45 * t0 + 1e-12);
      if (s.jitter_frac == 0.0) EXPECT_NEAR(p, t0, 1e-12);
    }
  });
}

TEST(SynthVoice, NoiseRmsMatchesRequestedFraction) {
  SynthSpec s;
  s.duration_s = 1.0;
  s.noise_rms_frac = 0.2;
  std::mt19937_64 rng(3);
  const SynthResult r = SynthVoiceWithTruth(s, rng);
  EXPECT_NEAR(r.noise_rms / r.voiced_rms, 0.2, 0.01);
}

TEST(SynthVoice, SameSeedSameSamples) {
  SynthSpec s;
  s.jitter_frac = 0.01;
  std::mt19937_64 a(42), b(42);
  EXPECT_EQ(SynthVoice(s, a).samples, SynthVoice(s, b).samples);
}

TEST(SynthVoice, ValidateRejectsNonsense) {
  SynthSpec s;
  s.f0_hz = -1.0;
  EXPECT_THROW(s.Validate(), ConfigError);
  s = {};
  s.formants_hz[1] = 9000.0;
  EXPECT_THROW(s.Validate(), ConfigError);
  s = {};
  s.duration_s = 0.0;
  EXPECT_THROW(s.Validate(), ConfigError);
}

TEST(SynthTones, PureToneNormalized) {
  const Waveform w = SynthTones({{440.0, 1.0}}, 0.25);
  EXPECT_EQ(w.samples.size(), 4000u);
  EXPECT_DOUBLE_EQ(*std::max_element(w.samples.begin(), w.samples.end()), 1.0);
}

TEST(MakeCorpus, LayoutIdsLabelsAndTags) {
  CorpusSpec spec = Small();
  spec.id_prefix = "tr-";
  const Corpus c = MakeCorpus(spec);
  ASSERT_EQ(c.waves.size(), 6u);
  ASSERT_EQ(c.manifest.entries.size(), 6u);
  EXPECT_EQ(c.waves[0].source_id, "tr-f0001");
  EXPECT_EQ(c.waves[3].source_id, "tr-m0001");
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(c.waves[i].gender, i < 3 ? Gender::kFemale : Gender::kMale);
    EXPECT_TRUE(c.waves[i].HasTag(AdaptationTag("default")));
    EXPECT_EQ(c.manifest.entries[i].path, "wavs/" + c.waves[i].source_id + ".wav");
    EXPECT_EQ(c.manifest.entries[i].gender, c.waves[i].gender);
  }
}

TEST(MakeCorpus, DeterministicPerSeedAndSeedSensitive) {
  const Corpus a = MakeCorpus(Small());
  const Corpus b = MakeCorpus(Small());
  CorpusSpec other = Small();
  other.seed = 2;
  const Corpus c = MakeCorpus(other);
  for (std::size_t i = 0; i < a.waves.size(); ++i) {
    EXPECT_EQ(a.waves[i].samples, b.waves[i].samples);
  }
  EXPECT_NE(a.waves[0].samples, c.waves[0].samples);
}

TEST(MakeCorpus, OverlyHappyGivesMalesFemaleRangePitch) {
  CorpusSpec spec = Small(6);
  spec.duration_s = 1.0;
  spec.adaptation = "overlyhappy";
  const Corpus c = MakeCorpus(spec);
  PitchConfig cfg;
  double male_mean = 0.0;
  for (const Waveform& w : c.waves) {
    EXPECT_TRUE(w.HasTag(AdaptationTag("overlyhappy")));
    if (w.gender == Gender::kMale) male_mean += ExtractAll(w, cfg)[Slot::kPitchMean] / 6.0;
  }
  // Halfway between the default gender means.
  EXPECT_GT(male_mean, 165.0);
}

TEST(MakeCorpus, ValidateRejectsUnknownAdaptation) {
  CorpusSpec spec = Small();
  spec.adaptation = "whisper";
  EXPECT_THROW(MakeCorpus(spec), ConfigError);
  spec = Small();
  spec.n_per_gender = 0;
  EXPECT_THROW(MakeCorpus(spec), ConfigError);
}

}  // namespace
}  // namespace voxprotect
