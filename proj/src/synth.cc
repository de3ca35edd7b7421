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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "dsp.h"
#include "voxprotect/error.h"

namespace voxprotect {
namespace {

constexpr double kPi = std::numbers::pi;
// Excitation and resonators run at this multiple of the output rate; the
// result is decimated with a windowed-sinc low-pass.
constexpr int kOversample = 4;
// Half width (samples) of the windowed-sinc used for fractional impulses.
constexpr int kSincHalfWidth = 16;
// Glottal pulse timing as fractions of the nominal period.
constexpr double kOpenFrac = 0.40;
constexpr double kCloseFrac = 0.16;

double Sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Derivative of the classic trigonometric glottal flow pulse: raised-cosine
// opening over `open` seconds, quarter-cosine closing over `close` seconds.
// The closure is abrupt, which gives the usual -12 dB/octave source tilt.
double GlottalFlowDerivative(double tau, double open, double close) {
  if (tau <= 0.0 || tau >= open + close) return 0.0;
  if (tau <= open) return 0.5 * kPi / open * std::sin(kPi * tau / open);
  const double u = (tau - open) / close;
  return -0.5 * kPi / close * std::sin(0.5 * kPi * u);
}

// Two-pole resonator with unity gain at DC.
void Resonate(std::vector<double>& x, double freq_hz, double bw_hz, double rate) {
  const double r = std::exp(-kPi * bw_hz / rate);
  const double theta = 2.0 * kPi * freq_hz / rate;
  const double a1 = 2.0 * r * std::cos(theta);
  const double a2 = -r * r;
  const double b0 = 1.0 - a1 - a2;
  double y1 = 0.0, y2 = 0.0;
  for (double& s : x) {
    const double y = b0 * s + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    s = y;
  }
}

double MeanRemovedRms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

void CheckFinitePositive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("synth: ") + name + " must be > 0");
  }
}

void CheckFraction(double v, const char* name) {
  if (!(v >= 0.0 && v < 0.5)) {
    throw ConfigError(std::string("synth: ") + name + " must be in [0, 0.5)");
  }
}

}  // namespace

void SynthSpec::Validate() const {
  if (!(f0_hz >= 50.0 && f0_hz <= 600.0)) {
    throw ConfigError("synth: f0_hz must be in [50, 600]");
  }
  CheckFinitePositive(duration_s, "duration_s");
  CheckFraction(jitter_frac, "jitter_frac");
  CheckFraction(shimmer_frac, "shimmer_frac");
  CheckFraction(noise_rms_frac, "noise_rms_frac");
  for (int k = 0; k < 3; ++k) {
    CheckFinitePositive(formant_bw_hz[k], "formant_bw_hz");
    if (!(formants_hz[k] > 0.0 && formants_hz[k] < kSampleRateHz / 2.0)) {
      throw ConfigError("synth: formants_hz must lie in (0, 8000)");
    }
  }
}

SynthResult SynthVoiceWithTruth(const SynthSpec& spec, std::mt19937_64& rng) {
  spec.Validate();
  const double rate = static_cast<double>(kSampleRateHz) * kOversample;
  const auto n_out = static_cast<std::size_t>(std::llround(spec.duration_s * kSampleRateHz));
  const std::size_t n = n_out * kOversample;
  std::normal_distribution<double> jitter_dist(0.0, spec.jitter_frac);
  std::normal_distribution<double> shimmer_dist(0.0, spec.shimmer_frac);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  SynthResult out;
  std::vector<double> excitation(n, 0.0);
  const double nominal = 1.0 / spec.f0_hz;
  double t = 0.002;
  while (t < spec.duration_s) {
    const double eta = spec.jitter_frac > 0.0
                           ? std::clamp(jitter_dist(rng), -0.45, 0.45)
                           : 0.0;
    const double xi = spec.shimmer_frac > 0.0 ? shimmer_dist(rng) : 0.0;
    const double period = nominal * (1.0 + eta);
    const double amp = std::max(0.05, 1.0 + xi);
    out.pulse_times_s.push_back(t);
    out.pulse_amplitudes.push_back(amp);

    const double center = t * rate;
    if (spec.pulse_shape == PulseShape::kImpulse) {
      const long lo = static_cast<long>(std::floor(center)) - kSincHalfWidth;
      const long hi = static_cast<long>(std::ceil(center)) + kSincHalfWidth;
      for (long i = std::max(0L, lo); i <= hi && i < static_cast<long>(n); ++i) {
        const double d = static_cast<double>(i) - center;
        const double win = 0.5 + 0.5 * std::cos(kPi * d / (kSincHalfWidth + 1));
        excitation[static_cast<std::size_t>(i)] += amp * Sinc(d) * win;
      }
    } else {
      // The shape follows the nominal period so the closure instant keeps a
      // fixed offset from the pulse onset under jitter.
      const double open = kOpenFrac * nominal;
      const double close = kCloseFrac * nominal;
      const long lo = static_cast<long>(std::floor(center));
      const long hi = static_cast<long>(std::ceil((t + open + close) * rate));
      // Opening slope peaks at amp * pi / 2 whatever f0 is.
      const double gain = amp * open;
      for (long i = std::max(0L, lo); i <= hi && i < static_cast<long>(n); ++i) {
        const double tau = static_cast<double>(i) / rate - t;
        excitation[static_cast<std::size_t>(i)] +=
            gain * GlottalFlowDerivative(tau, open, close);
      }
    }
    t += period;
  }

  for (int k = 0; k < 3; ++k) {
    Resonate(excitation, spec.formants_hz[k], spec.formant_bw_hz[k], rate);
  }
  excitation = dsp::Resample(excitation, rate, kSampleRateHz);
  excitation.resize(n_out, 0.0);
  out.voiced_rms = MeanRemovedRms(excitation);
  if (spec.noise_rms_frac > 0.0) {
    const double sigma = spec.noise_rms_frac * out.voiced_rms;
    std::vector<double> noise(n_out);
    for (double& v : noise) v = sigma * unit_normal(rng);
    out.noise_rms = MeanRemovedRms(noise);
    for (std::size_t i = 0; i < n_out; ++i) excitation[i] += noise[i];
  }

  out.wave.samples = std::move(excitation);
  out.wave.sample_rate_hz = kSampleRateHz;
  out.wave.degenerate_range = !NormalizeMinMax(out.wave.samples);
  return out;
}

Waveform SynthVoice(const SynthSpec& spec, std::mt19937_64& rng) {
  return SynthVoiceWithTruth(spec, rng).wave;
}

Waveform SynthTones(const std::vector<std::pair<double, double>>& tones,
                    double duration_s) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * kSampleRateHz));
  Waveform w;
  w.samples.assign(n, 0.0);
  for (const auto& [freq, amp] : tones) {
    for (std::size_t i = 0; i < n; ++i) {
      w.samples[i] += amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) /
                                     kSampleRateHz);
    }
  }
  w.degenerate_range = !NormalizeMinMax(w.samples);
  return w;
}

Waveform SynthWhiteNoise(double duration_s, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * kSampleRateHz));
  std::normal_distribution<double> dist(0.0, 1.0);
  Waveform w;
  w.samples.resize(n);
  for (double& v : w.samples) v = dist(rng);
  w.degenerate_range = !NormalizeMinMax(w.samples);
  return w;
}

void CorpusSpec::Validate() const {
  if (n_per_gender < 1) throw ConfigError("synth: n_per_gender must be >= 1");
  if (!(duration_s > 0.0)) throw ConfigError("synth: duration_s must be > 0");
  if (f0_f.std < 0.0 || f0_m.std < 0.0) {
    throw ConfigError("synth: f0 standard deviations must be >= 0");
  }
  for (const Range* r : {&jitter, &shimmer, &noise}) {
    if (r->lo < 0.0 || r->hi < r->lo || r->hi >= 0.5) {
      throw ConfigError("synth: ranges must satisfy 0 <= lo <= hi < 0.5");
    }
  }
  if (formant_spread < 0.0 || formant_spread >= 0.5) {
    throw ConfigError("synth: formant_spread must be in [0, 0.5)");
  }
  if (adaptation != "default" && adaptation != "overlyhappy" &&
      adaptation != "lowrobot" && adaptation != "highrobot") {
    throw ConfigError("synth: unknown adaptation '" + adaptation + "'");
  }
}

std::string AdaptationTag(const std::string& adaptation) {
  return "adaptation=" + adaptation;
}

Corpus MakeCorpus(const CorpusSpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  Corpus corpus;
  for (Gender g : {Gender::kFemale, Gender::kMale}) {
    const bool female = g == Gender::kFemale;
    const Distribution own = female ? spec.f0_f : spec.f0_m;
    const auto& base_formants = female ? spec.formants_f_hz : spec.formants_m_hz;
    for (int i = 1; i <= spec.n_per_gender; ++i) {
      std::normal_distribution<double> f0_own(own.mean, own.std);
      std::normal_distribution<double> f0_female(spec.f0_f.mean, spec.f0_f.std);
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      // Every utterance consumes the same number of draws regardless of the
      // adaptation, so proxies stay paired with their default counterparts.
      const double f0_draw = own.std > 0.0 ? f0_own(rng) : own.mean;
      const double f0_female_draw =
          spec.f0_f.std > 0.0 ? f0_female(rng) : spec.f0_f.mean;
      const double uj = u01(rng), us = u01(rng), un = u01(rng), uf = u01(rng);
      const std::uint64_t voice_seed = rng();

      SynthSpec s;
      s.duration_s = spec.duration_s;
      s.pulse_shape = spec.pulse_shape;
      s.jitter_frac = spec.jitter.lo + uj * (spec.jitter.hi - spec.jitter.lo);
      s.shimmer_frac = spec.shimmer.lo + us * (spec.shimmer.hi - spec.shimmer.lo);
      s.noise_rms_frac = spec.noise.lo + un * (spec.noise.hi - spec.noise.lo);
      const double scale = 1.0 + spec.formant_spread * (2.0 * uf - 1.0);
      for (int k = 0; k < 3; ++k) {
        s.formants_hz[k] = std::min(base_formants[k] * scale, 7000.0);
        s.formant_bw_hz[k] = spec.formant_bw_hz[k];
      }
      double f0 = f0_draw;
      if (spec.adaptation == "overlyhappy") {
        f0 = f0_female_draw;
      } else if (spec.adaptation == "lowrobot" || spec.adaptation == "highrobot") {
        f0 = own.mean * (spec.adaptation == "lowrobot" ? 0.85 : 1.15);
        s.jitter_frac = spec.jitter.lo;
        s.shimmer_frac = spec.shimmer.lo;
      }
      s.f0_hz = std::clamp(f0, 55.0, 500.0);

      std::mt19937_64 voice_rng(voice_seed);
      Waveform w = SynthVoice(s, voice_rng);
      char id[32];
      std::snprintf(id, sizeof(id), "%c%04d", female ? 'f' : 'm', i);
      w.source_id = spec.id_prefix + id;
      w.speaker_id = w.source_id;
      w.gender = g;
      w.tags.insert(AdaptationTag(spec.adaptation));

      ManifestEntry e;
      e.path = "wavs/" + w.source_id + ".wav";
      e.speaker_id = w.speaker_id;
      e.gender = g;
      e.tags = w.tags;
      corpus.manifest.entries.push_back(std::move(e));
      corpus.waves.push_back(std::move(w));
    }
  }
  return corpus;
}

}  // namespace voxprotect
