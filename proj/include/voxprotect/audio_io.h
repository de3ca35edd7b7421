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

// Waveform loading, normalization, length shaping and framing.
//
// Every pipeline stage consumes audio in the [0, 1] representation: the
// utterance is min-max normalized, so digital silence sits at 0.5 and the
// extreme samples touch 0 and 1. DSP code removes the per-frame mean before
// doing anything else with a frame.

#ifndef VOXPROTECT_AUDIO_IO_H_
#define VOXPROTECT_AUDIO_IO_H_

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace voxprotect {

inline constexpr int kSampleRateHz = 16000;
// Value used to pad short utterances: silence in the [0, 1] representation.
inline constexpr double kSilenceValue = 0.5;

enum class Gender { kFemale, kMale };

// 'F' / 'M'.
char GenderCode(Gender g);
// Accepts "F"/"M" (case-insensitive); throws DataError otherwise.
Gender ParseGender(std::string_view code);
// Label mapping used by every linear model: F -> +1, M -> -1.
inline int GenderSign(Gender g) { return g == Gender::kFemale ? 1 : -1; }

struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = kSampleRateHz;
  std::string source_id;
  std::string speaker_id;
  std::optional<Gender> gender;
  std::set<std::string> tags;
  // Set when min-max normalization saw max == min.
  bool degenerate_range = false;

  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  bool HasTag(const std::string& tag) const { return tags.count(tag) > 0; }
};

// How integer/float WAV samples are mapped into [0, 1] on load.
enum class WavScaling {
  kMinMax,  // per-utterance min-max (default for raw recordings)
  kAffine,  // x -> (x + 1) / 2, for files this toolkit wrote itself
};

// Reads RIFF PCM16 or IEEE float32 WAV. Channels are averaged before
// normalization. Throws FormatError, EmptyInputError or RateError.
Waveform LoadWav(const std::string& path,
                 WavScaling scaling = WavScaling::kMinMax);
Waveform DecodeWav(std::span<const std::uint8_t> bytes,
                   WavScaling scaling = WavScaling::kMinMax);

// Writes float32 mono WAV with x -> 2x - 1, the inverse of kAffine.
void WriteWav(const std::string& path, const Waveform& w);
std::vector<std::uint8_t> EncodeWav(const Waveform& w);
// 16-bit PCM writer for arbitrary interleaved channels in [-1, 1]. Used to
// produce fixtures and for interoperability.
std::vector<std::uint8_t> EncodePcm16(std::span<const double> interleaved,
                                      int channels, int sample_rate_hz);

// Maps samples to [0, 1] in place. Returns false (and zeroes every sample)
// when the range is degenerate.
bool NormalizeMinMax(std::vector<double>& samples);

// Pads with kSilenceValue or truncates to round(seconds * rate) samples.
Waveform FixLength(const Waveform& w, double seconds);

// Contiguous chunk of round(seconds * rate) samples starting at a uniformly
// drawn offset. Inputs shorter than the chunk are padded first and
// returned whole.
Waveform RandomChunk(const Waveform& w, double seconds, std::mt19937_64& rng);

enum class WindowType { kRectangular, kHann, kGaussian };

std::vector<double> MakeWindow(WindowType type, std::size_t length);

struct FrameSequence {
  std::vector<std::vector<double>> frames;
  double frame_s = 0.0;
  double hop_s = 0.0;
  WindowType window = WindowType::kRectangular;
  std::vector<double> start_times;
};

// Number of frames of length `frame_len` and hop `hop` that fit in n samples
// (zero when n < frame_len).
std::size_t FrameCount(std::size_t n, std::size_t frame_len, std::size_t hop);

// Frames are DC-removed, then windowed. Throws EmptyInputError when the
// signal is shorter than one frame.
FrameSequence FrameSignal(const Waveform& w, double frame_s, double hop_s,
                          WindowType window);

struct ManifestEntry {
  std::string path;
  std::string speaker_id;
  std::optional<Gender> gender;
  std::set<std::string> tags;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// CSV with header `path,speaker_id,gender,tags`; tags are ';'-separated.
// Relative paths are kept as written. Throws DataError on malformed rows or
// duplicated paths.
Manifest ParseManifest(std::string_view text);
Manifest ReadManifest(const std::string& path);
std::string FormatManifest(const Manifest& m);
void WriteManifest(const std::string& path, const Manifest& m);

// Resolves entry paths relative to the manifest's directory and loads every
// file. Rows tagged "perturbed" were written by this toolkit and are read
// with kAffine scaling. The source_id of each waveform is the file stem.
std::vector<Waveform> LoadCorpus(const std::string& manifest_path);
std::vector<Waveform> LoadCorpus(const Manifest& m,
                                 const std::string& base_dir);

// Writes <dir>/wavs/<source_id>.wav for every waveform and returns the
// matching manifest (paths relative to `dir`).
Manifest WriteCorpus(const std::string& dir,
                     const std::vector<Waveform>& corpus);

}  // namespace voxprotect

#endif  // VOXPROTECT_AUDIO_IO_H_
