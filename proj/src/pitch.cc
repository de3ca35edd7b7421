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

// Autocorrelation pitch tracking and glottal pulse extraction.

#include <algorithm>
#include <cmath>

#include "dsp.h"
#include "voxprotect/error.h"
#include "voxprotect/features.h"

namespace voxprotect {
namespace {

// Half width of the sinc kernel used to refine autocorrelation peaks and
// pulse positions.
constexpr int kInterpDepth = 24;
// Pulses weaker than this fraction of the run's seed pulse end a run.
constexpr double kPulseStopFraction = 0.1;
// Subharmonic check in the pitch tracker.
constexpr double kSubharmonicRatio = 0.95;
constexpr double kSubharmonicSlack = 0.05;
// A run also ends when consecutive periods stop looking alike.
constexpr double kMinPulseCorrelation = 0.5;
constexpr int kCorrInterpDepth = 8;

struct Candidate {
  double lag = 0.0;
  double strength = 0.0;
  double score = 0.0;
};

double FrameRmsDb(const double* x, std::size_t n) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i];
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += (x[i] - mean) * (x[i] - mean);
  const double rms = std::sqrt(acc / static_cast<double>(n));
  return rms > 0.0 ? 20.0 * std::log10(rms) : -400.0;
}

// Pearson correlation of x[a - half .. a + half] and x[b - half .. b + half].
double WindowCorrelation(std::span<const double> x, long a, long b, long half) {
  const double* pa = x.data() + (a - half);
  const double* pb = x.data() + (b - half);
  const long m = 2 * half + 1;
  double ma = 0.0, mb = 0.0;
  for (long k = 0; k < m; ++k) {
    ma += pa[k];
    mb += pb[k];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (long k = 0; k < m; ++k) {
    const double da = pa[k] - ma, db = pb[k] - mb;
    ab += da * db;
    aa += da * da;
    bb += db * db;
  }
  return aa > 0.0 && bb > 0.0 ? ab / std::sqrt(aa * bb) : 0.0;
}

// Moving mean over [i - half, i + half] (clipped to the signal).
class LocalMean {
 public:
  explicit LocalMean(std::span<const double> x) : prefix_(x.size() + 1, 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) prefix_[i + 1] = prefix_[i] + x[i];
  }
  double At(long i, long half) const {
    const long n = static_cast<long>(prefix_.size()) - 1;
    const long lo = std::clamp(i - half, 0L, n - 1);
    const long hi = std::clamp(i + half, 0L, n - 1);
    return (prefix_[hi + 1] - prefix_[lo]) / static_cast<double>(hi - lo + 1);
  }

 private:
  std::vector<double> prefix_;
};

}  // namespace

void PitchConfig::Validate() const {
  if (!(floor_hz > 0.0) || !(ceiling_hz > floor_hz)) {
    throw ConfigError("pitch: require 0 < floor_hz < ceiling_hz");
  }
  if (ceiling_hz >= kSampleRateHz / 2.0) {
    throw ConfigError("pitch: ceiling_hz must be below the Nyquist frequency");
  }
  if (!(hop_s > 0.0) || frame_s < hop_s) {
    throw ConfigError("pitch: require frame_s >= hop_s > 0");
  }
  if (frame_s * kSampleRateHz <= kSampleRateHz / floor_hz + 2.0) {
    throw ConfigError("pitch: frame_s must exceed one period at floor_hz");
  }
  if (!(voicing_threshold > 0.0 && voicing_threshold < 1.0)) {
    throw ConfigError("pitch: voicing_threshold must be in (0, 1)");
  }
  if (silence_threshold_db > 0.0) {
    throw ConfigError("pitch: silence_threshold_db must be <= 0");
  }
  if (octave_cost < 0.0) throw ConfigError("pitch: octave_cost must be >= 0");
}

std::size_t PitchTrack::VoicedCount() const {
  return static_cast<std::size_t>(
      std::count_if(frames.begin(), frames.end(),
                    [](const PitchFrame& f) { return f.voiced; }));
}

double PitchTrack::FractionUnvoiced() const {
  if (frames.empty()) return 1.0;
  return 1.0 - static_cast<double>(VoicedCount()) / static_cast<double>(frames.size());
}

PitchTrack TrackPitch(const Waveform& w, const PitchConfig& cfg) {
  cfg.Validate();
  const double rate = w.sample_rate_hz;
  const auto len = static_cast<std::size_t>(std::llround(cfg.frame_s * rate));
  const auto hop = static_cast<std::size_t>(std::llround(cfg.hop_s * rate));
  const std::size_t count = FrameCount(w.samples.size(), len, hop);

  PitchTrack track;
  track.frame_s = cfg.frame_s;
  track.hop_s = cfg.hop_s;
  track.duration_s = w.DurationSeconds();
  if (count == 0) return track;

  const std::vector<double> window = MakeWindow(WindowType::kHann, len);
  const std::size_t max_lag = len - 1;
  dsp::RealFft fft(dsp::NextPowerOfTwo(2 * len));
  const std::vector<double> window_ac = dsp::Autocorrelation(fft, window, max_lag);

  std::vector<double> intensity(count);
  for (std::size_t f = 0; f < count; ++f) {
    intensity[f] = FrameRmsDb(w.samples.data() + f * hop, len);
  }
  const double loudest = *std::max_element(intensity.begin(), intensity.end());

  const double min_lag = rate / cfg.ceiling_hz;
  const double max_lag_period = rate / cfg.floor_hz;
  const auto k_lo = static_cast<std::size_t>(std::max(2.0, std::floor(min_lag)));
  const auto k_hi = std::min(max_lag - 1, static_cast<std::size_t>(std::ceil(max_lag_period)));

  std::vector<double> frame(len);
  std::vector<double> r(max_lag + 1);
  track.frames.resize(count);
  for (std::size_t f = 0; f < count; ++f) {
    PitchFrame& out = track.frames[f];
    out.time_s = (static_cast<double>(f * hop) + 0.5 * static_cast<double>(len)) / rate;

    const double* src = w.samples.data() + f * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < len; ++i) mean += src[i];
    mean /= static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) frame[i] = (src[i] - mean) * window[i];
    const std::vector<double> ac = dsp::Autocorrelation(fft, frame, max_lag);
    if (!(ac[0] > 0.0)) continue;
    for (std::size_t k = 0; k <= max_lag; ++k) {
      r[k] = window_ac[k] > 0.0 ? (ac[k] / ac[0]) / (window_ac[k] / window_ac[0]) : 0.0;
    }

    std::vector<Candidate> candidates;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
      if (!(r[k] >= r[k - 1] && r[k] > r[k + 1])) continue;
      const double denom = r[k - 1] - 2.0 * r[k] + r[k + 1];
      const double delta = denom < 0.0 ? 0.5 * (r[k - 1] - r[k + 1]) / denom : 0.0;
      Candidate c;
      c.lag = static_cast<double>(k) + delta;
      c.strength = r[k] - 0.25 * (r[k - 1] - r[k + 1]) * delta;
      if (c.lag < min_lag || c.lag > max_lag_period) continue;
      c.score = c.strength - cfg.octave_cost * std::log2(cfg.floor_hz * c.lag / rate);
      candidates.push_back(c);
    }
    if (candidates.empty()) continue;
    Candidate best = *std::max_element(
        candidates.begin(), candidates.end(),
        [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
    // A nearly-as-strong peak at an integer fraction of the winning lag is
    // the true period; the window correction inflates long lags.
    for (const Candidate& c : candidates) {
      if (c.lag >= best.lag || c.strength < kSubharmonicRatio * best.strength) continue;
      const double ratio = best.lag / c.lag;
      if (std::abs(ratio - std::round(ratio)) <= kSubharmonicSlack * ratio) {
        best = c;
        break;
      }
    }

    // Band-limited refinement of the winning peak.
    auto normalized = [&](double lag) {
      const double num = dsp::SincInterpolateEven(ac, lag, kInterpDepth) / ac[0];
      const double den =
          dsp::SincInterpolateEven(window_ac, lag, kInterpDepth) / window_ac[0];
      return den > 0.0 ? num / den : 0.0;
    };
    const double lo = std::max(min_lag, best.lag - 1.0);
    const double hi = std::min(max_lag_period, best.lag + 1.0);
    const double lag = dsp::GoldenMaximize(normalized, lo, hi, 30);
    const double strength = std::clamp(normalized(lag), 0.0, 1.0);

    out.strength = strength;
    const bool loud = intensity[f] >= loudest + cfg.silence_threshold_db;
    if (loud && strength >= cfg.voicing_threshold) {
      out.voiced = true;
      out.f0_hz = rate / lag;
    }
  }

  // 3-point median over consecutive voiced frames.
  std::vector<double> smoothed(count);
  for (std::size_t f = 0; f < count; ++f) smoothed[f] = track.frames[f].f0_hz;
  for (std::size_t f = 1; f + 1 < count; ++f) {
    const PitchFrame& a = track.frames[f - 1];
    const PitchFrame& b = track.frames[f];
    const PitchFrame& c = track.frames[f + 1];
    if (!(a.voiced && b.voiced && c.voiced)) continue;
    double v[3] = {a.f0_hz, b.f0_hz, c.f0_hz};
    std::sort(v, v + 3);
    smoothed[f] = v[1];
  }
  for (std::size_t f = 0; f < count; ++f) track.frames[f].f0_hz = smoothed[f];
  return track;
}

PulseSequence ExtractPulses(const Waveform& w, const PitchTrack& track) {
  PulseSequence out;
  const std::size_t n_frames = track.frames.size();
  if (n_frames == 0 || w.samples.empty()) return out;
  const double rate = w.sample_rate_hz;
  const std::span<const double> x(w.samples);
  const LocalMean local_mean(x);
  const long n = static_cast<long>(x.size());

  std::vector<std::pair<double, double>> pulses;  // (time, amplitude)
  std::size_t f = 0;
  while (f < n_frames) {
    if (!track.frames[f].voiced) {
      ++f;
      continue;
    }
    const std::size_t first = f;
    while (f < n_frames && track.frames[f].voiced) ++f;
    const std::size_t last = f - 1;

    const double half_hop = 0.5 * track.hop_s;
    const double t_start = first == 0 ? 0.0 : track.frames[first].time_s - half_hop;
    const double t_end = last + 1 == n_frames ? track.duration_s
                                              : track.frames[last].time_s + half_hop;
    const long s_start = std::clamp(static_cast<long>(std::ceil(t_start * rate)), 0L, n - 1);
    const long s_end = std::clamp(static_cast<long>(std::floor(t_end * rate)), 0L, n - 1);
    if (s_end - s_start < 3) continue;

    // Local period (samples) from the nearest voiced frame of this run.
    auto period_at = [&](double sample) {
      const double t = sample / rate;
      double idx = (t - track.frames[first].time_s) / track.hop_s;
      const auto k = first + static_cast<std::size_t>(
                                 std::clamp(std::lround(idx), 0L,
                                            static_cast<long>(last - first)));
      return rate / track.frames[k].f0_hz;
    };
    auto deviation = [&](double t_samples, double sign) {
      const long i = std::lround(t_samples);
      const long half = std::lround(period_at(t_samples));
      return sign * (dsp::SincInterpolate(x, t_samples, kInterpDepth) -
                     local_mean.At(i, half));
    };

    // Seed: strongest absolute deviation within the run, kept a period
    // clear of its edges when the run is long enough.
    const long margin = std::lround(period_at(0.5 * static_cast<double>(s_start + s_end)));
    const bool roomy = s_end - s_start > 2 * margin;
    const long seed_lo = roomy ? s_start + margin : s_start;
    const long seed_hi = roomy ? s_end - margin : s_end;
    long seed = seed_lo;
    double seed_dev = -1.0;
    for (long i = seed_lo; i <= seed_hi; ++i) {
      const long half = std::lround(period_at(static_cast<double>(i)));
      const double d = std::abs(x[static_cast<std::size_t>(i)] - local_mean.At(i, half));
      if (d > seed_dev) {
        seed_dev = d;
        seed = i;
      }
    }
    if (!(seed_dev > 0.0)) continue;
    const double sign =
        x[static_cast<std::size_t>(seed)] >= local_mean.At(seed, std::lround(period_at(seed)))
            ? 1.0
            : -1.0;

    auto refine = [&](long k) {
      auto f_dev = [&](double t) { return deviation(t, sign); };
      const double lo = std::max(static_cast<double>(s_start), k - 1.0);
      const double hi = std::min(static_cast<double>(s_end), k + 1.0);
      const double t = dsp::GoldenMaximize(f_dev, lo, hi, 30);
      return std::make_pair(t, f_dev(t));
    };

    const auto seed_pulse = refine(seed);
    const double stop_level = kPulseStopFraction * seed_pulse.second;
    std::vector<std::pair<double, double>> run{seed_pulse};

    // Each next pulse is the shift that best aligns one period of waveform
    // with the period around the current pulse; peak picking alone hops
    // between formant-ringing cycles at higher f0.
    for (int direction : {1, -1}) {
      double t = seed_pulse.first;
      while (true) {
        const double period = period_at(t);
        const long centre = std::lround(t);
        const long l_lo = static_cast<long>(std::ceil(0.8 * period));
        const long l_hi = static_cast<long>(std::floor(1.2 * period));
        // Near the run edges the compared windows shrink, down to half a
        // period.
        const long reach =
            direction > 0 ? s_end - (centre + l_hi) : (centre - l_hi) - s_start;
        const long half =
            std::min({std::lround(0.5 * period), centre - s_start, s_end - centre, reach});
        if (half < std::max(1L, std::lround(0.25 * period))) break;
        const auto in_run = [&](long lag) {
          const long c = centre + direction * lag;
          return c - half >= s_start && c + half <= s_end;
        };
        std::vector<double> corr;
        const long first_lag = l_lo - kCorrInterpDepth;
        for (long lag = first_lag; lag <= l_hi + kCorrInterpDepth; ++lag) {
          const long clamped = std::clamp(lag, l_lo, l_hi);
          corr.push_back(in_run(lag) ? WindowCorrelation(x, centre, centre + direction * lag, half)
                                     : WindowCorrelation(x, centre,
                                                         centre + direction * clamped, half));
        }
        long best = l_lo;
        for (long lag = l_lo; lag <= l_hi; ++lag) {
          if (corr[lag - first_lag] > corr[best - first_lag]) best = lag;
        }
        if (corr[best - first_lag] < kMinPulseCorrelation) break;
        auto interp = [&](double lag) {
          return dsp::SincInterpolate(corr, lag - static_cast<double>(first_lag),
                                      kCorrInterpDepth);
        };
        const double lag = dsp::GoldenMaximize(
            interp, std::max<double>(l_lo, best - 1.0), std::min<double>(l_hi, best + 1.0), 30);
        const double next = t + direction * lag;
        const double amplitude = refine(std::lround(next)).second;
        if (amplitude < stop_level) break;
        run.emplace_back(next, amplitude);
        t = next;
      }
    }
    pulses.insert(pulses.end(), run.begin(), run.end());
  }

  std::sort(pulses.begin(), pulses.end());
  for (const auto& [t, a] : pulses) {
    if (!out.times_s.empty() && t / rate <= out.times_s.back()) continue;
    out.times_s.push_back(t / rate);
    out.amplitudes.push_back(a);
  }
  return out;
}

}  // namespace voxprotect
