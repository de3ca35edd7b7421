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

// Feature registry, the full extraction chain and the feature-file format.

#include <sstream>

#include "text_util.h"
#include "voxprotect/error.h"
#include "voxprotect/features.h"

namespace voxprotect {
namespace {

constexpr std::array<std::string_view, kNumFeatures> kNames = {
    "duration_s",        "pitch_min",         "pitch_max",
    "pitch_mean",        "pitch_median",      "pitch_std",
    "f0",                "period_mean",       "period_std",
    "num_pulses",        "num_periods",       "num_voicebreaks",
    "degree_voicebreaks", "fraction_unvoiced", "jitter_local",
    "jitter_rap",        "jitter_ppq5",       "jitter_local_absolute",
    "shimmer_local",     "shimmer_apq3",      "shimmer_apq5",
    "shimmer_apq11",     "shimmer_local_db",  "autocor_mean",
    "nhr_mean",          "hnr_mean",          "intensity_min",
    "intensity_max",     "intensity_mean",    "intensity_std",
    "formant_f1_mean",   "formant_f2_mean",   "formant_f3_mean",
    "spectral_cog",
};

struct FlagName {
  std::uint32_t bit;
  std::string_view name;
};

constexpr FlagName kFlagNames[] = {
    {kFlagDegenerateRange, "degenerate_range"},
    {kFlagNoVoicedFrames, "no_voiced_frames"},
    {kFlagJitterInsufficient, "jitter_insufficient"},
    {kFlagShimmerInsufficient, "shimmer_insufficient"},
    {kFlagExcludedAmplitude, "excluded_amplitude"},
    {kFlagNoHarmonicity, "no_harmonicity"},
    {kFlagSilentIntensity, "silent_intensity"},
    {kFlagNoFormants, "no_formants"},
    {kFlagZeroSpectrum, "zero_spectrum"},
    {kFlagShortPitchFrame, "short_pitch_frame"},
};

}  // namespace

std::string_view FeatureName(Slot slot) { return kNames[static_cast<int>(slot)]; }

std::string_view FeatureName(int index) {
  if (index < 0 || index >= kNumFeatures) {
    throw DataError("feature index out of range: " + std::to_string(index));
  }
  return kNames[static_cast<std::size_t>(index)];
}

int FeatureIndex(std::string_view name) {
  for (int i = 0; i < kNumFeatures; ++i) {
    if (kNames[static_cast<std::size_t>(i)] == name) return i;
  }
  throw DataError("unknown feature name: " + std::string(name));
}

const std::array<std::string_view, kNumFeatures>& FeatureNames() { return kNames; }

std::string FormatFlags(std::uint32_t flags) {
  if (flags == kFlagNone) return "none";
  std::string out;
  for (const FlagName& f : kFlagNames) {
    if (!(flags & f.bit)) continue;
    if (!out.empty()) out += '|';
    out += f.name;
  }
  return out;
}

std::uint32_t ParseFlags(std::string_view text) {
  const std::string t = text::Trim(text);
  if (t.empty() || t == "none") return kFlagNone;
  std::uint32_t flags = kFlagNone;
  for (const std::string& part : text::SplitRow(t, '|')) {
    bool found = false;
    for (const FlagName& f : kFlagNames) {
      if (f.name == text::Trim(part)) {
        flags |= f.bit;
        found = true;
      }
    }
    if (!found) throw DataError("unknown quality flag: " + part);
  }
  return flags;
}

FeatureVector ExtractAll(const Waveform& w, const PitchConfig& cfg) {
  cfg.Validate();
  FeatureVector v;
  if (w.degenerate_range) v.flags |= kFlagDegenerateRange;
  if (cfg.frame_s < 3.0 / cfg.floor_hz) v.flags |= kFlagShortPitchFrame;
  const double total_s = w.DurationSeconds();
  v[Slot::kDurationS] = total_s;

  const PitchTrack track = TrackPitch(w, cfg);
  const PulseSequence pulses = ExtractPulses(w, track);

  const VoiceBreakStats vb = ComputeVoiceBreaks(pulses, track, cfg, total_s);
  v[Slot::kPitchMin] = vb.pitch_min;
  v[Slot::kPitchMax] = vb.pitch_max;
  v[Slot::kPitchMean] = vb.pitch_mean;
  v[Slot::kPitchMedian] = vb.pitch_median;
  v[Slot::kPitchStd] = vb.pitch_std;
  v[Slot::kF0] = vb.f0_hz;
  v[Slot::kPeriodMean] = vb.period_mean_s;
  v[Slot::kPeriodStd] = vb.period_std_s;
  v[Slot::kNumPulses] = vb.num_pulses;
  v[Slot::kNumPeriods] = vb.num_periods;
  v[Slot::kNumVoicebreaks] = vb.num_voicebreaks;
  v[Slot::kDegreeVoicebreaks] = vb.degree_voicebreaks;
  v[Slot::kFractionUnvoiced] = vb.fraction_unvoiced;
  v.flags |= vb.flags;

  const JitterMeasures j = ComputeJitter(pulses, cfg);
  v[Slot::kJitterLocal] = j.local;
  v[Slot::kJitterRap] = j.rap;
  v[Slot::kJitterPpq5] = j.ppq5;
  v[Slot::kJitterLocalAbsolute] = j.local_absolute;
  v.flags |= j.flags;

  const ShimmerMeasures s = ComputeShimmer(pulses, cfg);
  v[Slot::kShimmerLocal] = s.local;
  v[Slot::kShimmerApq3] = s.apq3;
  v[Slot::kShimmerApq5] = s.apq5;
  v[Slot::kShimmerApq11] = s.apq11;
  v[Slot::kShimmerLocalDb] = s.local_db;
  v.flags |= s.flags;

  const Harmonicity h = ComputeHarmonicity(track);
  v[Slot::kAutocorMean] = h.autocor_mean;
  v[Slot::kNhrMean] = h.nhr_mean;
  v[Slot::kHnrMean] = h.hnr_mean_db;
  v.flags |= h.flags;

  const IntensityStats in = ComputeIntensity(w);
  v[Slot::kIntensityMin] = in.min_db;
  v[Slot::kIntensityMax] = in.max_db;
  v[Slot::kIntensityMean] = in.mean_db;
  v[Slot::kIntensityStd] = in.std_db;
  v.flags |= in.flags;

  const FormantMeans fm = ComputeFormants(w, track);
  v[Slot::kFormantF1Mean] = fm.f1_hz;
  v[Slot::kFormantF2Mean] = fm.f2_hz;
  v[Slot::kFormantF3Mean] = fm.f3_hz;
  v.flags |= fm.flags;

  const SpectralCog cog = ComputeSpectralCog(w);
  v[Slot::kSpectralCog] = cog.hz;
  v.flags |= cog.flags;
  return v;
}

std::vector<FeatureVector> ExtractCorpus(const std::vector<Waveform>& corpus,
                                         const PitchConfig& cfg) {
  std::vector<FeatureVector> out;
  out.reserve(corpus.size());
  for (const Waveform& w : corpus) out.push_back(ExtractAll(w, cfg));
  return out;
}

std::string FormatFeatureTable(const std::vector<FeatureRow>& rows) {
  std::ostringstream out;
  out << "# registry=" << kFeatureRegistryVersion << " slots=" << kNumFeatures << '\n';
  out << "source_id,gender,tags";
  for (std::string_view n : kNames) out << ',' << n;
  out << ",flags\n";
  for (const FeatureRow& r : rows) {
    out << r.source_id << ',';
    if (r.gender) out << GenderCode(*r.gender);
    out << ',' << text::JoinTags(r.tags);
    for (double v : r.features.values) out << ',' << text::FormatDouble(v);
    out << ',' << FormatFlags(r.features.flags) << '\n';
  }
  return out.str();
}

std::vector<FeatureRow> ParseFeatureTable(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  bool version_seen = false, header_seen = false;
  std::vector<FeatureRow> rows;
  int line_no = 0;
  const std::size_t width = 3 + kNumFeatures + 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::Trim(line).empty()) continue;
    const std::string where = "feature table line " + std::to_string(line_no);
    if (line[0] == '#') {
      const std::string key = "registry=";
      const auto p = line.find(key);
      if (p != std::string::npos) {
        const std::string version = text::SplitRow(line.substr(p + key.size()), ' ')[0];
        if (version != kFeatureRegistryVersion) {
          throw DataError(where + ": registry version " + version + " does not match " +
                          std::string(kFeatureRegistryVersion));
        }
        version_seen = true;
      }
      continue;
    }
    const std::vector<std::string> cols = text::SplitRow(line, ',');
    if (cols.size() != width) {
      throw DataError(where + ": expected " + std::to_string(width) + " columns, got " +
                      std::to_string(cols.size()));
    }
    if (!header_seen) {
      if (cols[0] != "source_id" || cols[1] != "gender" || cols[2] != "tags" ||
          cols.back() != "flags") {
        throw DataError(where + ": bad header");
      }
      for (int i = 0; i < kNumFeatures; ++i) {
        if (text::Trim(cols[3 + static_cast<std::size_t>(i)]) != kNames[static_cast<std::size_t>(i)]) {
          throw DataError(where + ": column " + std::to_string(i + 3) + " should be " +
                          std::string(kNames[static_cast<std::size_t>(i)]));
        }
      }
      header_seen = true;
      continue;
    }
    FeatureRow r;
    r.source_id = text::Trim(cols[0]);
    const std::string g = text::Trim(cols[1]);
    if (!g.empty()) r.gender = ParseGender(g);
    r.tags = text::ParseTags(cols[2]);
    for (int i = 0; i < kNumFeatures; ++i) {
      const auto u = static_cast<std::size_t>(i);
      r.features.values[u] = text::ParseDouble(cols[3 + u], where + " " + std::string(kNames[u]));
    }
    r.features.flags = ParseFlags(cols.back());
    rows.push_back(std::move(r));
  }
  if (!version_seen) throw DataError("feature table has no registry version comment");
  if (!header_seen) throw DataError("feature table has no header row");
  return rows;
}

void WriteFeatureTable(const std::string& path, const std::vector<FeatureRow>& rows) {
  text::WriteTextFile(path, FormatFeatureTable(rows));
}

std::vector<FeatureRow> ReadFeatureTable(const std::string& path) {
  try {
    return ParseFeatureTable(text::ReadTextFile(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace voxprotect
