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

// Praat-style acoustic measures computed from first principles: pitch
// (windowed autocorrelation), glottal pulses, jitter, shimmer, harmonicity,
// intensity, LPC formants and the spectral centre of gravity.
//
// Undefined measures never abort extraction. They take a sentinel value
// (0, or -80 dB for intensity) and raise a quality flag, so every utterance
// yields a full-width vector.

#ifndef VOXPROTECT_FEATURES_H_
#define VOXPROTECT_FEATURES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxprotect/audio_io.h"

namespace voxprotect {

struct PitchConfig {
  double floor_hz = 75.0;
  double ceiling_hz = 600.0;
  double frame_s = 0.040;
  double hop_s = 0.010;
  double voicing_threshold = 0.45;
  // Frames quieter than (utterance max + this) are unvoiced.
  double silence_threshold_db = -40.0;
  // Penalty per octave of lag, favouring the highest-frequency candidate
  // among equally strong autocorrelation peaks.
  double octave_cost = 0.01;

  // Throws ConfigError for invalid values.
  void Validate() const;
  // Longest period that still counts as voiced (1.25 / floor).
  double MaxPeriodS() const { return 1.25 / floor_hz; }
  double MinPeriodS() const { return 1.0 / ceiling_hz; }
};

struct PitchFrame {
  double time_s = 0.0;  // frame centre
  double f0_hz = 0.0;   // 0 when unvoiced
  double strength = 0.0;  // normalized autocorrelation peak r' in [0, 1]
  bool voiced = false;
};

struct PitchTrack {
  std::vector<PitchFrame> frames;
  double frame_s = 0.0;
  double hop_s = 0.0;
  double duration_s = 0.0;

  std::size_t VoicedCount() const;
  double FractionUnvoiced() const;
};

struct PulseSequence {
  std::vector<double> times_s;
  std::vector<double> amplitudes;
};

enum QualityFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagDegenerateRange = 1u << 0,
  kFlagNoVoicedFrames = 1u << 1,
  kFlagJitterInsufficient = 1u << 2,
  kFlagShimmerInsufficient = 1u << 3,
  kFlagExcludedAmplitude = 1u << 4,
  kFlagNoHarmonicity = 1u << 5,
  kFlagSilentIntensity = 1u << 6,
  kFlagNoFormants = 1u << 7,
  kFlagZeroSpectrum = 1u << 8,
  kFlagShortPitchFrame = 1u << 9,
};

// "none" or '|'-joined flag names.
std::string FormatFlags(std::uint32_t flags);
std::uint32_t ParseFlags(std::string_view text);

// Feature registry. The order is part of the file format; bump
// kFeatureRegistryVersion whenever it changes.
enum class Slot : int {
  kDurationS,
  kPitchMin,
  kPitchMax,
  kPitchMean,
  kPitchMedian,
  kPitchStd,
  kF0,
  kPeriodMean,
  kPeriodStd,
  kNumPulses,
  kNumPeriods,
  kNumVoicebreaks,
  kDegreeVoicebreaks,
  kFractionUnvoiced,
  kJitterLocal,
  kJitterRap,
  kJitterPpq5,
  kJitterLocalAbsolute,
  kShimmerLocal,
  kShimmerApq3,
  kShimmerApq5,
  kShimmerApq11,
  kShimmerLocalDb,
  kAutocorMean,
  kNhrMean,
  kHnrMean,
  kIntensityMin,
  kIntensityMax,
  kIntensityMean,
  kIntensityStd,
  kFormantF1Mean,
  kFormantF2Mean,
  kFormantF3Mean,
  kSpectralCog,
};

inline constexpr int kNumFeatures = 34;
inline constexpr std::string_view kFeatureRegistryVersion = "voxprotect-features-v1";

std::string_view FeatureName(Slot slot);
std::string_view FeatureName(int index);
// Index of a slot name; throws DataError for unknown names.
int FeatureIndex(std::string_view name);
const std::array<std::string_view, kNumFeatures>& FeatureNames();

struct FeatureVector {
  std::array<double, kNumFeatures> values{};
  std::uint32_t flags = kFlagNone;

  double& operator[](Slot s) { return values[static_cast<int>(s)]; }
  double operator[](Slot s) const { return values[static_cast<int>(s)]; }
};

PitchTrack TrackPitch(const Waveform& w, const PitchConfig& cfg);

// Pulses are seeded at the strongest deviation of each voiced run and
// propagated period by period: the next pulse sits at the shift in 0.8-1.2
// local periods that best correlates the surrounding waveform. Amplitudes
// are the peak deviation near each pulse, with the seed's polarity.
PulseSequence ExtractPulses(const Waveform& w, const PitchTrack& track);

struct JitterMeasures {
  double local = 0.0;
  double local_absolute = 0.0;
  double rap = 0.0;
  double ppq5 = 0.0;
  std::uint32_t flags = kFlagNone;
};

// Periods outside [1/ceiling, 1.25/floor] are voice breaks and are never
// differenced.
JitterMeasures ComputeJitter(const PulseSequence& p, const PitchConfig& cfg);

struct ShimmerMeasures {
  double local = 0.0;
  double local_db = 0.0;
  double apq3 = 0.0;
  double apq5 = 0.0;
  double apq11 = 0.0;
  std::uint32_t flags = kFlagNone;
};

ShimmerMeasures ComputeShimmer(const PulseSequence& p, const PitchConfig& cfg);

struct Harmonicity {
  double autocor_mean = 0.0;
  double nhr_mean = 0.0;
  double hnr_mean_db = 0.0;
  std::uint32_t flags = kFlagNone;
};

// Aggregates per-frame peak strengths r'.
Harmonicity HarmonicityFromStrengths(std::span<const double> strengths);
Harmonicity ComputeHarmonicity(const PitchTrack& track);
Harmonicity ComputeHarmonicity(const Waveform& w, const PitchConfig& cfg);

struct IntensityStats {
  double min_db = -80.0;
  double max_db = -80.0;
  double mean_db = -80.0;
  double std_db = -80.0;
  std::uint32_t flags = kFlagNone;
};

inline constexpr double kIntensityFloorDb = -80.0;

IntensityStats ComputeIntensity(const Waveform& w);

struct FormantMeans {
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  double f3_hz = 0.0;
  std::size_t frames_used = 0;
  std::uint32_t flags = kFlagNone;
};

FormantMeans ComputeFormants(const Waveform& w, const PitchTrack& track);

// Burg linear prediction: x[n] ~ sum_k coefs[k] * x[n - 1 - k].
std::vector<double> BurgLpc(std::span<const double> x, int order);

struct SpectralCog {
  double hz = 0.0;
  std::uint32_t flags = kFlagNone;
};

SpectralCog ComputeSpectralCog(const Waveform& w);

struct VoiceBreakStats {
  double num_voicebreaks = 0.0;
  double degree_voicebreaks = 0.0;
  double fraction_unvoiced = 1.0;
  double num_pulses = 0.0;
  double num_periods = 0.0;
  double period_mean_s = 0.0;
  double period_std_s = 0.0;
  double pitch_min = 0.0;
  double pitch_max = 0.0;
  double pitch_mean = 0.0;
  double pitch_median = 0.0;
  double pitch_std = 0.0;
  double f0_hz = 0.0;
  std::uint32_t flags = kFlagNone;
};

VoiceBreakStats ComputeVoiceBreaks(const PulseSequence& p,
                                   const PitchTrack& track,
                                   const PitchConfig& cfg, double total_s);

// Full chain. Deterministic; never throws on degenerate audio.
FeatureVector ExtractAll(const Waveform& w, const PitchConfig& cfg);

// Row-aligned features for a corpus.
std::vector<FeatureVector> ExtractCorpus(const std::vector<Waveform>& corpus,
                                         const PitchConfig& cfg);

// Feature file: '#'-prefixed header comment naming the registry version,
// then a CSV header `source_id,gender,tags,<34 names>,flags` and one row per
// utterance. Values are written with round-trip precision.
struct FeatureRow {
  std::string source_id;
  std::optional<Gender> gender;
  std::set<std::string> tags;
  FeatureVector features;
};

std::string FormatFeatureTable(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> ParseFeatureTable(std::string_view text);
void WriteFeatureTable(const std::string& path, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> ReadFeatureTable(const std::string& path);

}  // namespace voxprotect

#endif  // VOXPROTECT_FEATURES_H_
