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

// Jitter, shimmer, harmonicity, intensity, spectral centre of gravity and
// voice-break statistics.

#include <algorithm>
#include <cmath>

#include "dsp.h"
#include "voxprotect/features.h"

namespace voxprotect {
namespace {

constexpr double kStrengthClamp = 1e-6;
constexpr double kIntensityFrameS = 0.032;
constexpr double kIntensityHopS = 0.010;

// valid[i] says whether the interval between pulse i and i + 1 is a period
// (as opposed to a voice break).
std::vector<bool> ValidPeriods(const PulseSequence& p, const PitchConfig& cfg,
                               std::vector<double>* periods) {
  const std::size_t n = p.times_s.size();
  std::vector<bool> valid(n > 0 ? n - 1 : 0, false);
  if (periods) periods->assign(valid.size(), 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t = p.times_s[i + 1] - p.times_s[i];
    if (periods) (*periods)[i] = t;
    valid[i] = t >= cfg.MinPeriodS() && t <= cfg.MaxPeriodS();
  }
  return valid;
}

// Mean over every index i where window [i - half, i + half] is fully valid
// of |v[i] - mean(window)|. Returns false when no window qualifies.
bool CenteredDeviation(const std::vector<double>& v, const std::vector<bool>& ok,
                       int half, double* out) {
  double acc = 0.0;
  std::size_t count = 0;
  const long n = static_cast<long>(v.size());
  for (long i = half; i + half < n; ++i) {
    bool all = true;
    double sum = 0.0;
    for (long j = i - half; j <= i + half; ++j) {
      if (!ok[static_cast<std::size_t>(j)]) {
        all = false;
        break;
      }
      sum += v[static_cast<std::size_t>(j)];
    }
    if (!all) continue;
    acc += std::abs(v[static_cast<std::size_t>(i)] - sum / (2 * half + 1));
    ++count;
  }
  if (count == 0) return false;
  *out = acc / static_cast<double>(count);
  return true;
}

}  // namespace

JitterMeasures ComputeJitter(const PulseSequence& p, const PitchConfig& cfg) {
  JitterMeasures out;
  std::vector<double> periods;
  const std::vector<bool> valid = ValidPeriods(p, cfg, &periods);
  std::vector<double> used;
  for (std::size_t i = 0; i < periods.size(); ++i) {
    if (valid[i]) used.push_back(periods[i]);
  }
  const double mean_period = dsp::Mean(used);

  double diff_sum = 0.0;
  std::size_t diff_count = 0;
  for (std::size_t i = 1; i < periods.size(); ++i) {
    if (!(valid[i] && valid[i - 1])) continue;
    diff_sum += std::abs(periods[i] - periods[i - 1]);
    ++diff_count;
  }
  if (used.size() >= 3 && diff_count > 0 && mean_period > 0.0) {
    out.local_absolute = diff_sum / static_cast<double>(diff_count);
    out.local = out.local_absolute / mean_period;
  } else {
    out.flags |= kFlagJitterInsufficient;
  }
  double dev = 0.0;
  if (used.size() >= 4 && mean_period > 0.0 && CenteredDeviation(periods, valid, 1, &dev)) {
    out.rap = dev / mean_period;
  } else {
    out.flags |= kFlagJitterInsufficient;
  }
  if (used.size() >= 6 && mean_period > 0.0 && CenteredDeviation(periods, valid, 2, &dev)) {
    out.ppq5 = dev / mean_period;
  } else {
    out.flags |= kFlagJitterInsufficient;
  }
  return out;
}

ShimmerMeasures ComputeShimmer(const PulseSequence& p, const PitchConfig& cfg) {
  ShimmerMeasures out;
  const std::size_t n = p.amplitudes.size();
  const std::vector<bool> valid = ValidPeriods(p, cfg, nullptr);

  // A pulse takes part when its amplitude is positive and it is connected to
  // a neighbour by a valid period.
  std::vector<bool> ok(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.amplitudes[i] > 0.0)) {
      out.flags |= kFlagExcludedAmplitude;
      continue;
    }
    const bool left = i > 0 && valid[i - 1];
    const bool right = i + 1 < n && valid[i];
    ok[i] = left || right;
  }
  std::vector<double> used;
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) used.push_back(p.amplitudes[i]);
  }
  const double mean_amp = dsp::Mean(used);

  double diff_sum = 0.0, db_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (!(ok[i] && ok[i - 1] && valid[i - 1])) continue;
    diff_sum += std::abs(p.amplitudes[i] - p.amplitudes[i - 1]);
    db_sum += std::abs(20.0 * std::log10(p.amplitudes[i] / p.amplitudes[i - 1]));
    ++pairs;
  }
  if (used.size() >= 2 && pairs > 0 && mean_amp > 0.0) {
    out.local = diff_sum / static_cast<double>(pairs) / mean_amp;
    out.local_db = db_sum / static_cast<double>(pairs);
  } else {
    out.flags |= kFlagShimmerInsufficient;
  }

  // Windows of apqN must consist of pulses joined by valid periods.
  auto apq = [&](int points, double* slot) {
    const int half = points / 2;
    double acc = 0.0;
    std::size_t count = 0;
    for (long i = half; i + half < static_cast<long>(n); ++i) {
      bool all = true;
      double sum = 0.0;
      for (long j = i - half; j <= i + half; ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (!ok[u] || (j < i + half && !valid[u])) {
          all = false;
          break;
        }
        sum += p.amplitudes[u];
      }
      if (!all) continue;
      acc += std::abs(p.amplitudes[static_cast<std::size_t>(i)] - sum / points);
      ++count;
    }
    if (used.size() >= static_cast<std::size_t>(points) && count > 0 && mean_amp > 0.0) {
      *slot = acc / static_cast<double>(count) / mean_amp;
    } else {
      out.flags |= kFlagShimmerInsufficient;
    }
  };
  apq(3, &out.apq3);
  apq(5, &out.apq5);
  apq(11, &out.apq11);
  return out;
}

Harmonicity HarmonicityFromStrengths(std::span<const double> strengths) {
  Harmonicity out;
  if (strengths.empty()) {
    out.flags |= kFlagNoHarmonicity;
    return out;
  }
  double ac = 0.0, nhr = 0.0, hnr = 0.0;
  for (double s : strengths) {
    const double r = std::clamp(s, kStrengthClamp, 1.0 - kStrengthClamp);
    ac += r;
    nhr += (1.0 - r) / r;
    hnr += 10.0 * std::log10(r / (1.0 - r));
  }
  const double n = static_cast<double>(strengths.size());
  out.autocor_mean = ac / n;
  out.nhr_mean = nhr / n;
  out.hnr_mean_db = hnr / n;
  return out;
}

Harmonicity ComputeHarmonicity(const PitchTrack& track) {
  std::vector<double> strengths;
  for (const PitchFrame& f : track.frames) {
    if (f.voiced) strengths.push_back(f.strength);
  }
  return HarmonicityFromStrengths(strengths);
}

Harmonicity ComputeHarmonicity(const Waveform& w, const PitchConfig& cfg) {
  return ComputeHarmonicity(TrackPitch(w, cfg));
}

IntensityStats ComputeIntensity(const Waveform& w) {
  IntensityStats out;
  const auto len = static_cast<std::size_t>(std::llround(kIntensityFrameS * w.sample_rate_hz));
  const auto hop = static_cast<std::size_t>(std::llround(kIntensityHopS * w.sample_rate_hz));
  const std::size_t count = FrameCount(w.samples.size(), len, hop);
  std::vector<double> db;
  for (std::size_t f = 0; f < count; ++f) {
    const double* x = w.samples.data() + f * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < len; ++i) mean += x[i];
    mean /= static_cast<double>(len);
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += (x[i] - mean) * (x[i] - mean);
    const double rms = std::sqrt(acc / static_cast<double>(len));
    const double level = rms > 0.0 ? std::max(kIntensityFloorDb, 20.0 * std::log10(rms))
                                    : kIntensityFloorDb;
    if (level > kIntensityFloorDb) db.push_back(level);
  }
  if (db.empty()) {
    out.flags |= kFlagSilentIntensity;
    return out;
  }
  out.min_db = *std::min_element(db.begin(), db.end());
  out.max_db = *std::max_element(db.begin(), db.end());
  out.mean_db = dsp::Mean(db);
  out.std_db = dsp::SampleStd(db);
  return out;
}

SpectralCog ComputeSpectralCog(const Waveform& w) {
  SpectralCog out;
  const std::size_t n = w.samples.size();
  if (n < 2) {
    out.flags |= kFlagZeroSpectrum;
    return out;
  }
  const double mean = dsp::Mean(w.samples);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = w.samples[i] - mean;
  dsp::RealFft fft(n);
  const auto spec = fft.Forward(x);
  double num = 0.0, den = 0.0;
  const double bin_hz = static_cast<double>(w.sample_rate_hz) / static_cast<double>(n);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double p = std::norm(spec[k]);
    num += static_cast<double>(k) * bin_hz * p;
    den += p;
  }
  if (!(den > 0.0)) {
    out.flags |= kFlagZeroSpectrum;
    return out;
  }
  out.hz = num / den;
  return out;
}

VoiceBreakStats ComputeVoiceBreaks(const PulseSequence& p, const PitchTrack& track,
                                   const PitchConfig& cfg, double total_s) {
  VoiceBreakStats out;
  const std::size_t n = p.times_s.size();
  out.num_pulses = static_cast<double>(n);
  double break_time = 0.0;
  std::vector<double> periods;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t = p.times_s[i + 1] - p.times_s[i];
    if (t > cfg.MaxPeriodS()) {
      out.num_voicebreaks += 1.0;
      break_time += t;
    } else if (t >= cfg.MinPeriodS()) {
      periods.push_back(t);
    }
  }
  out.degree_voicebreaks = total_s > 0.0 ? std::min(1.0, break_time / total_s) : 0.0;
  out.num_periods = static_cast<double>(periods.size());
  out.period_mean_s = dsp::Mean(periods);
  out.period_std_s = dsp::SampleStd(periods);
  out.f0_hz = out.period_mean_s > 0.0 ? 1.0 / out.period_mean_s : 0.0;

  out.fraction_unvoiced = track.FractionUnvoiced();
  std::vector<double> f0;
  for (const PitchFrame& f : track.frames) {
    if (f.voiced) f0.push_back(f.f0_hz);
  }
  if (f0.empty()) {
    out.flags |= kFlagNoVoicedFrames;
    return out;
  }
  out.pitch_min = *std::min_element(f0.begin(), f0.end());
  out.pitch_max = *std::max_element(f0.begin(), f0.end());
  out.pitch_mean = dsp::Mean(f0);
  out.pitch_median = dsp::Median(f0);
  out.pitch_std = dsp::SampleStd(f0);
  return out;
}

}  // namespace voxprotect
